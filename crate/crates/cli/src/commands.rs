//! One function per subcommand. Each writes its artifacts and returns a
//! short summary for the manifest.

use serde_json::{json, Value};

use greyvar_core::estimator::SurfaceEstimator;
use greyvar_core::lattice::dual_shells;
use greyvar_core::spectral::{ball_fourier_asymptotic, ball_fourier_from};
use greyvar_core::stats::loglog_slope;
use greyvar_core::variance::{
    variance_asymptotic_isotropic, variance_asymptotic_random_radius, variance_empirical_from,
    variance_empirical_random_radius, variance_exact_from, AsymptoticModel,
};
use greyvar_core::{HalfspaceProfile, Phantom, ProfileGrid, VarianceReport, Window};

use crate::config::ExperimentConfig;
use crate::failure::Failure;
use crate::output::{maybe, number, Outputs};

pub const VARIANCE_HEADER: &[&str] = &[
    "a",
    "b",
    "var_emp",
    "se",
    "var_exact",
    "var_asym",
    "osc_bound",
    "xi_max",
    "tail_bound",
];

fn profile_of(config: &ExperimentConfig) -> Result<HalfspaceProfile, Failure> {
    Ok(HalfspaceProfile::new(
        &config.psf()?,
        ProfileGrid::default(),
    ))
}

fn single_pair(config: &ExperimentConfig, command: &str) -> Result<(f64, f64), Failure> {
    match config.pairs().as_slice() {
        [pair] => Ok(*pair),
        pairs => Err(Failure::usage(
            "a",
            format!(
                "`{command}` needs a single (a, b) pair, the grids give {}",
                pairs.len()
            ),
        )),
    }
}

fn ball_radius(phantom: &Phantom, command: &str) -> Result<f64, Failure> {
    phantom
        .as_ball()
        .map(|(_, r)| r)
        .ok_or_else(|| Failure::usage("phantom.kind", format!("`{command}` needs a ball phantom")))
}

/// Half-spaces are unbounded, so their sums need an explicit window.
fn window_for(config: &ExperimentConfig, phantom: &Phantom) -> Result<Option<Window>, Failure> {
    let window = config.window()?;
    if window.is_none() && phantom.as_ball().is_none() {
        return Err(Failure::usage(
            "window.lo",
            "a half-space phantom needs window.lo and window.hi",
        ));
    }
    Ok(window)
}

pub fn profile(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, Failure> {
    let grid = ProfileGrid {
        points: config.profile_points,
    };
    let table = HalfspaceProfile::new(&config.psf()?, grid);
    let rows: Vec<Vec<String>> = table
        .rows()
        .map(|(t, theta, dtheta)| vec![number(t), number(theta), number(dtheta)])
        .collect();
    out.csv("profile.csv", &["t", "theta_h", "dtheta_h"], &rows)?;
    Ok(json!({ "rows": rows.len() }))
}

pub fn shells(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, Failure> {
    let shells = dual_shells(&config.lattice()?, config.shells_cutoff);
    let rows: Vec<Vec<String>> = shells
        .iter()
        .map(|s| vec![number(s.norm), s.multiplicity.to_string()])
        .collect();
    out.csv("shells.csv", &["norm", "multiplicity"], &rows)?;
    Ok(json!({ "shells": rows.len() }))
}

pub fn estimate(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, Failure> {
    let (a, b) = single_pair(config, "estimate")?;
    let profile = profile_of(config)?;
    let phantom = config.phantom()?;
    let window = window_for(config, &phantom)?;
    let est = SurfaceEstimator::new(&profile, &phantom, &config.weight()?, a)?;
    let e = variance_empirical_from(
        &est,
        b,
        &config.lattice()?,
        window.as_ref(),
        config.replicates,
        config.seed,
    )?;
    let s = e.summary;
    let record = json!({
        "mean": s.mean,
        "sd": s.sd,
        "n": s.n,
        "mean_se": s.mean_se,
        "a": a,
        "b": b,
        "seed": config.seed,
        "config": config.to_raw(),
    });
    out.json("estimate.json", &record)?;
    Ok(json!({ "mean": s.mean, "sd": s.sd, "n": s.n }))
}

pub fn fourier(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, Failure> {
    let (a, b) = single_pair(config, "fourier")?;
    let profile = profile_of(config)?;
    let phantom = config.phantom()?;
    let radius = ball_radius(&phantom, "fourier")?;
    let f = config.weight()?;
    let est = SurfaceEstimator::new(&profile, &phantom, &f, a)?;
    let mut rows = Vec::new();
    for xi in config.fourier_xi.values() {
        let value = ball_fourier_from(&est, xi / b)?;
        let model = ball_fourier_asymptotic(radius, a, b, xi, &f, &profile, config.regime)?;
        rows.push(vec![
            number(xi),
            number(value),
            number(0.0),
            number(value * value),
            number(model),
        ]);
    }
    out.csv(
        "fourier.csv",
        &["xi_norm", "re", "im", "abs2", "model_abs2"],
        &rows,
    )?;
    Ok(json!({ "rows": rows.len() }))
}

/// Which variance columns a subcommand fills.
#[derive(Debug, Clone, Copy)]
pub struct Parts {
    pub empirical: bool,
    pub theory: bool,
}

fn same_scale(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.max(b)
}

fn variance_report(
    config: &ExperimentConfig,
    profile: &HalfspaceProfile,
    a: f64,
    b: f64,
    parts: Parts,
) -> Result<VarianceReport, Failure> {
    let phantom = config.phantom()?;
    let f = config.weight()?;
    let lattice = config.lattice()?;
    let density = config.radius_density()?;
    let mut report = VarianceReport::new(phantom, *profile.psf(), f, a, b, lattice);
    if density.is_some() && !same_scale(a, b) {
        return Err(Failure::usage(
            "b",
            "randomly scaled balls are studied at b = a only",
        ));
    }
    let est = SurfaceEstimator::new(profile, &phantom, &f, a)?;
    if parts.empirical {
        let e = match &density {
            Some(h) => variance_empirical_random_radius(
                profile,
                &phantom,
                h,
                &f,
                a,
                &lattice,
                config.replicates,
                config.seed,
            )?,
            None => {
                let window = window_for(config, &phantom)?;
                variance_empirical_from(
                    &est,
                    b,
                    &lattice,
                    window.as_ref(),
                    config.replicates,
                    config.seed,
                )?
            }
        };
        report = report.with_empirical(&e);
    }
    if parts.theory {
        ball_radius(&phantom, "theory-variance")?;
        match &density {
            Some(h) => {
                let r = variance_asymptotic_random_radius(profile, &phantom, h, &f, a, &lattice)?;
                report = report.with_asymptotic(AsymptoticModel::RandomRadius, r.variance, 0.0);
            }
            None => {
                report = report.with_exact(&variance_exact_from(&est, b, &lattice)?);
                if same_scale(a, b) {
                    let m = variance_asymptotic_isotropic(profile, &phantom, &f, a, &lattice)?;
                    report = report.with_asymptotic(
                        AsymptoticModel::Isotropic,
                        m.main,
                        m.oscillation_bound,
                    );
                }
            }
        }
    }
    Ok(report)
}

fn row(r: &VarianceReport) -> Vec<String> {
    vec![
        number(r.a),
        number(r.b),
        maybe(r.empirical.map(|e| e.variance)),
        maybe(r.empirical.map(|e| e.standard_error)),
        maybe(r.exact.map(|e| e.variance)),
        maybe(r.asymptotic.map(|m| m.value)),
        maybe(r.asymptotic.map(|m| m.oscillation_bound)),
        maybe(r.exact.map(|e| e.xi_max)),
        maybe(r.exact.map(|e| e.tail_bound)),
    ]
}

/// Log-log slope of `y` against a, when at least two distinct a carry values.
fn slope(reports: &[VarianceReport], y: impl Fn(&VarianceReport) -> Option<f64>) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = reports.iter().filter_map(|r| Some((r.a, y(r)?))).unzip();
    let distinct = xs.iter().any(|x| *x != xs[0]);
    if xs.len() < 2 || !distinct {
        return None;
    }
    loglog_slope(&xs, &ys).ok()
}

pub fn variance(
    config: &ExperimentConfig,
    out: &mut Outputs,
    name: &str,
    parts: Parts,
) -> Result<Value, Failure> {
    let profile = profile_of(config)?;
    let reports = config
        .pairs()
        .into_iter()
        .map(|(a, b)| variance_report(config, &profile, a, b, parts))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = reports.iter().map(row).collect();
    out.csv(&format!("{name}.csv"), VARIANCE_HEADER, &rows)?;
    let fits = json!({
        "slope_var_emp": slope(&reports, |r| r.empirical.map(|e| e.variance)),
        "slope_var_exact": slope(&reports, |r| r.exact.map(|e| e.variance)),
        "slope_var_asym": slope(&reports, |r| r.asymptotic.map(|m| m.value)),
    });
    let z_scores: Vec<Option<f64>> = reports.iter().map(VarianceReport::z_score).collect();
    out.json(
        &format!("{name}.json"),
        &json!({ "reports": reports, "z_scores": z_scores, "fits": fits }),
    )?;
    Ok(json!({ "rows": rows.len(), "fits": fits }))
}
