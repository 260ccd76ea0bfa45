//! Flat `key = value` experiment configuration with dotted keys.
//!
//! Lines are `key = value`; `#` starts a comment. Later assignments override
//! earlier ones, so `--set` flags simply append to the file contents.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use greyvar_core::{
    Lattice, Phantom, Psf, PsfKind, RadiusDensity, Regime, WeightFunction, WeightKind, Window,
};

use crate::failure::Failure;

/// Every recognised key, in the order `to_text` writes them.
pub const KEYS: &[&str] = &[
    "dim",
    "phantom.kind",
    "phantom.radius",
    "phantom.normal",
    "phantom.offset",
    "psf.kind",
    "psf.sigma",
    "psf.radius",
    "weight.kind",
    "weight.lower",
    "weight.rise_end",
    "weight.fall_start",
    "weight.upper",
    "weight.amplitude",
    "a",
    "b",
    "lattice.matrix",
    "window.lo",
    "window.hi",
    "radius_density.lower",
    "radius_density.upper",
    "replicates",
    "seed",
    "output",
    "fourier.xi",
    "fourier.regime",
    "shells.cutoff",
    "profile.points",
];

/// Raw assignments, later ones winning.
pub type RawConfig = BTreeMap<String, String>;

/// Parses `key = value` lines into `raw`, overriding existing keys.
pub fn parse_into(raw: &mut RawConfig, text: &str) -> Result<(), Failure> {
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::usage(
                "config",
                format!("line {}: expected `key = value`, got `{line}`", n + 1),
            )
        })?;
        assign(raw, key.trim(), value.trim())?;
    }
    Ok(())
}

/// Sets one key after checking that it is known.
pub fn assign(raw: &mut RawConfig, key: &str, value: &str) -> Result<(), Failure> {
    if !KEYS.contains(&key) {
        return Err(Failure::usage(
            key,
            format!("unknown configuration key `{key}`"),
        ));
    }
    raw.insert(key.to_string(), value.to_string());
    Ok(())
}

/// A scale grid: an explicit list or `geometric(start, stop, count)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<f64>),
    Geometric { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Geometric { start, stop, count } => {
                if count == 1 {
                    return vec![start];
                }
                let ratio = stop / start;
                (0..count)
                    .map(|i| start * ratio.powf(i as f64 / (count - 1) as f64))
                    .collect()
            }
        }
    }

    fn parse(key: &str, text: &str) -> Result<Self, Failure> {
        if let Some(inner) = text
            .strip_prefix("geometric(")
            .and_then(|s| s.strip_suffix(')'))
        {
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Failure::usage(
                    key,
                    "expected geometric(start, stop, count)",
                ));
            }
            let start = number(key, parts[0])?;
            let stop = number(key, parts[1])?;
            let count = parts[2].parse::<usize>().map_err(|_| {
                Failure::usage(
                    key,
                    format!("count must be a positive integer, got `{}`", parts[2]),
                )
            })?;
            if count == 0 {
                return Err(Failure::usage(key, "count must be at least 1"));
            }
            return Ok(Grid::Geometric { start, stop, count });
        }
        let values = numbers(key, text)?;
        if values.is_empty() {
            return Err(Failure::usage(key, "grid is empty"));
        }
        Ok(Grid::List(values))
    }

    fn to_text(&self) -> String {
        match self {
            Grid::List(v) => join(v),
            Grid::Geometric { start, stop, count } => format!("geometric({start},{stop},{count})"),
        }
    }

    fn check_positive(&self, key: &str) -> Result<(), Failure> {
        match self.values().iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            Some(v) => Err(Failure::usage(
                key,
                format!("scales must be finite and > 0, got {v}"),
            )),
            None => Ok(()),
        }
    }
}

/// How b follows a.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    /// b = a.
    SameAsA,
    /// b = a².
    SquareOfA,
    /// Every b of the grid with every a.
    Grid(Grid),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomSpec {
    Ball { radius: f64 },
    HalfSpace { normal: Vec<f64>, offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub phantom: PhantomSpec,
    pub psf: PsfKind,
    pub weight: WeightKind,
    pub amplitude: f64,
    pub a: Grid,
    pub b: Resolution,
    /// Row-major basis matrix; the columns are the basis vectors.
    pub lattice: Vec<f64>,
    pub window: Option<(Vec<f64>, Vec<f64>)>,
    /// Support of the random scale density, if the ball is randomly scaled.
    pub radius_density: Option<(f64, f64)>,
    pub replicates: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub fourier_xi: Grid,
    pub regime: Regime,
    pub shells_cutoff: f64,
    pub profile_points: usize,
}

fn number(key: &str, text: &str) -> Result<f64, Failure> {
    let v = text
        .trim()
        .parse::<f64>()
        .map_err(|_| Failure::usage(key, format!("expected a number, got `{text}`")))?;
    if !v.is_finite() {
        return Err(Failure::usage(
            key,
            format!("expected a finite number, got `{text}`"),
        ));
    }
    Ok(v)
}

fn numbers(key: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| number(key, s))
        .collect()
}

fn integer<T: std::str::FromStr>(key: &str, text: &str) -> Result<T, Failure> {
    text.trim()
        .parse::<T>()
        .map_err(|_| Failure::usage(key, format!("expected a nonnegative integer, got `{text}`")))
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Equal => "equal",
        Regime::FineLattice => "fine_lattice",
        Regime::CoarseLattice => "coarse_lattice",
    }
}

/// Reads keys from a raw map, falling back to defaults.
struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    fn text<'k>(&'k self, key: &str, default: &'k str) -> &'k str {
        self.get(key).unwrap_or(default)
    }

    fn number(&self, key: &str, default: f64) -> Result<f64, Failure> {
        self.get(key).map_or(Ok(default), |t| number(key, t))
    }

    fn required(&self, key: &str) -> Result<f64, Failure> {
        let t = self
            .get(key)
            .ok_or_else(|| Failure::usage(key, format!("`{key}` must be set")))?;
        number(key, t)
    }
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, Failure> {
        let r = Reader { raw };
        let dim: usize = integer("dim", r.text("dim", "2"))?;
        if !(2..=3).contains(&dim) {
            return Err(Failure::usage(
                "dim",
                format!("dimension must be 2 or 3, got {dim}"),
            ));
        }
        let phantom = match r.text("phantom.kind", "ball") {
            "ball" => PhantomSpec::Ball {
                radius: r.number("phantom.radius", 1.0)?,
            },
            "half_space" => {
                let normal = match r.get("phantom.normal") {
                    Some(t) => numbers("phantom.normal", t)?,
                    None => (0..dim).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
                };
                PhantomSpec::HalfSpace {
                    normal,
                    offset: r.number("phantom.offset", 0.0)?,
                }
            }
            other => {
                return Err(Failure::usage(
                    "phantom.kind",
                    format!("expected `ball` or `half_space`, got `{other}`"),
                ))
            }
        };
        let psf = match r.text("psf.kind", "gaussian") {
            "gaussian" => PsfKind::Gaussian {
                sigma: r.number("psf.sigma", 1.0)?,
            },
            "compact_bump" => PsfKind::CompactBump {
                radius: r.number("psf.radius", 1.0)?,
            },
            "ball_indicator" => PsfKind::BallIndicator {
                radius: r.number("psf.radius", 1.0)?,
            },
            other => {
                return Err(Failure::usage(
                    "psf.kind",
                    format!(
                        "expected `gaussian`, `compact_bump` or `ball_indicator`, got `{other}`"
                    ),
                ))
            }
        };
        let weight = match r.text("weight.kind", "indicator") {
            "indicator" => WeightKind::Indicator {
                lower: r.number("weight.lower", 0.3)?,
                upper: r.number("weight.upper", 0.7)?,
            },
            "smooth_plateau" => WeightKind::SmoothPlateau {
                lower: r.number("weight.lower", 0.2)?,
                rise_end: r.number("weight.rise_end", 0.3)?,
                fall_start: r.number("weight.fall_start", 0.7)?,
                upper: r.number("weight.upper", 0.8)?,
            },
            other => {
                return Err(Failure::usage(
                    "weight.kind",
                    format!("expected `indicator` or `smooth_plateau`, got `{other}`"),
                ))
            }
        };
        let a = Grid::parse("a", r.text("a", "0.05"))?;
        a.check_positive("a")?;
        let b = match r.text("b", "a") {
            "a" => Resolution::SameAsA,
            "a^2" => Resolution::SquareOfA,
            text => {
                let g = Grid::parse("b", text)?;
                g.check_positive("b")?;
                Resolution::Grid(g)
            }
        };
        let lattice = match r.get("lattice.matrix") {
            Some(t) => numbers("lattice.matrix", t)?,
            None => (0..dim * dim)
                .map(|i| if i % (dim + 1) == 0 { 1.0 } else { 0.0 })
                .collect(),
        };
        if lattice.len() != dim * dim {
            return Err(Failure::usage(
                "lattice.matrix",
                format!(
                    "expected {} row-major entries for d = {dim}, got {}",
                    dim * dim,
                    lattice.len()
                ),
            ));
        }
        let window = match (r.get("window.lo"), r.get("window.hi")) {
            (None, None) => None,
            (Some(lo), Some(hi)) => Some((numbers("window.lo", lo)?, numbers("window.hi", hi)?)),
            (None, Some(_)) => {
                return Err(Failure::usage(
                    "window.lo",
                    "set both window.lo and window.hi",
                ))
            }
            (Some(_), None) => {
                return Err(Failure::usage(
                    "window.hi",
                    "set both window.lo and window.hi",
                ))
            }
        };
        let radius_density = match (r.get("radius_density.lower"), r.get("radius_density.upper")) {
            (None, None) => None,
            _ => Some((
                r.required("radius_density.lower")?,
                r.required("radius_density.upper")?,
            )),
        };
        let replicates: usize = integer("replicates", r.text("replicates", "10000"))?;
        let seed: u64 = integer("seed", r.text("seed", "0"))?;
        let fourier_xi = Grid::parse("fourier.xi", r.text("fourier.xi", "geometric(1,64,61)"))?;
        fourier_xi.check_positive("fourier.xi")?;
        let regime = match r.text("fourier.regime", "equal") {
            "equal" => Regime::Equal,
            "fine_lattice" => Regime::FineLattice,
            "coarse_lattice" => Regime::CoarseLattice,
            other => {
                return Err(Failure::usage(
                    "fourier.regime",
                    format!("expected `equal`, `fine_lattice` or `coarse_lattice`, got `{other}`"),
                ))
            }
        };
        let shells_cutoff = r.number("shells.cutoff", 5.0)?;
        if shells_cutoff <= 0.0 {
            return Err(Failure::usage("shells.cutoff", "cutoff must be > 0"));
        }
        let config = ExperimentConfig {
            dim,
            phantom,
            psf,
            weight,
            amplitude: r.number("weight.amplitude", 1.0)?,
            a,
            b,
            lattice,
            window,
            radius_density,
            replicates,
            seed,
            output: PathBuf::from(r.text("output", "greyvar-out")),
            fourier_xi,
            regime,
            shells_cutoff,
            profile_points: integer("profile.points", r.text("profile.points", "4097"))?,
        };
        config.validate()?;
        Ok(config)
    }

    /// Builds every library object once so that bad values surface as
    /// usage errors before any work starts.
    fn validate(&self) -> Result<(), Failure> {
        self.psf()?;
        self.weight()?;
        self.lattice()?;
        self.phantom()?;
        self.window()?;
        self.radius_density()?;
        if self.profile_points < 16 {
            return Err(Failure::usage(
                "profile.points",
                "need at least 16 grid points",
            ));
        }
        Ok(())
    }

    pub fn psf(&self) -> Result<Psf, Failure> {
        Psf::new(self.dim, self.psf).map_err(Failure::from)
    }

    pub fn weight(&self) -> Result<WeightFunction, Failure> {
        let f = WeightFunction::new(self.weight).map_err(Failure::from)?;
        if self.amplitude == 1.0 {
            Ok(f)
        } else {
            f.scaled(self.amplitude).map_err(Failure::from)
        }
    }

    pub fn lattice(&self) -> Result<Lattice, Failure> {
        Lattice::from_row_major(self.dim, &self.lattice).map_err(Failure::from)
    }

    pub fn phantom(&self) -> Result<Phantom, Failure> {
        match &self.phantom {
            PhantomSpec::Ball { radius } => Phantom::ball(self.dim, *radius),
            PhantomSpec::HalfSpace { normal, offset } => {
                Phantom::half_space(self.dim, normal, *offset)
            }
        }
        .map_err(Failure::from)
    }

    pub fn window(&self) -> Result<Option<Window>, Failure> {
        match &self.window {
            None => Ok(None),
            Some((lo, hi)) => {
                let w = Window::new(self.dim, lo, hi)
                    .map_err(|e| Failure::usage("window.lo", e.to_string()))?;
                if w.is_empty() {
                    return Err(Failure::usage(
                        "window.hi",
                        "window must have hi > lo on every axis",
                    ));
                }
                Ok(Some(w))
            }
        }
    }

    pub fn radius_density(&self) -> Result<Option<RadiusDensity>, Failure> {
        self.radius_density
            .map(|(lo, hi)| RadiusDensity::new(lo, hi).map_err(Failure::from))
            .transpose()
    }

    /// The (a, b) pairs of the run, in grid order.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        let a = self.a.values();
        match &self.b {
            Resolution::SameAsA => a.iter().map(|&a| (a, a)).collect(),
            Resolution::SquareOfA => a.iter().map(|&a| (a, a * a)).collect(),
            Resolution::Grid(g) => {
                let b = g.values();
                a.iter()
                    .flat_map(|&a| b.iter().map(move |&b| (a, b)))
                    .collect()
            }
        }
    }

    /// The explicit assignments that reproduce this configuration.
    pub fn to_raw(&self) -> RawConfig {
        let mut m = RawConfig::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("dim", self.dim.to_string());
        match &self.phantom {
            PhantomSpec::Ball { radius } => {
                put("phantom.kind", "ball".into());
                put("phantom.radius", radius.to_string());
            }
            PhantomSpec::HalfSpace { normal, offset } => {
                put("phantom.kind", "half_space".into());
                put("phantom.normal", join(normal));
                put("phantom.offset", offset.to_string());
            }
        }
        match self.psf {
            PsfKind::Gaussian { sigma } => {
                put("psf.kind", "gaussian".into());
                put("psf.sigma", sigma.to_string());
            }
            PsfKind::CompactBump { radius } => {
                put("psf.kind", "compact_bump".into());
                put("psf.radius", radius.to_string());
            }
            PsfKind::BallIndicator { radius } => {
                put("psf.kind", "ball_indicator".into());
                put("psf.radius", radius.to_string());
            }
        }
        match self.weight {
            WeightKind::Indicator { lower, upper } => {
                put("weight.kind", "indicator".into());
                put("weight.lower", lower.to_string());
                put("weight.upper", upper.to_string());
            }
            WeightKind::SmoothPlateau {
                lower,
                rise_end,
                fall_start,
                upper,
            } => {
                put("weight.kind", "smooth_plateau".into());
                put("weight.lower", lower.to_string());
                put("weight.rise_end", rise_end.to_string());
                put("weight.fall_start", fall_start.to_string());
                put("weight.upper", upper.to_string());
            }
        }
        put("weight.amplitude", self.amplitude.to_string());
        put("a", self.a.to_text());
        put(
            "b",
            match &self.b {
                Resolution::SameAsA => "a".into(),
                Resolution::SquareOfA => "a^2".into(),
                Resolution::Grid(g) => g.to_text(),
            },
        );
        put("lattice.matrix", join(&self.lattice));
        if let Some((lo, hi)) = &self.window {
            put("window.lo", join(lo));
            put("window.hi", join(hi));
        }
        if let Some((lo, hi)) = self.radius_density {
            put("radius_density.lower", lo.to_string());
            put("radius_density.upper", hi.to_string());
        }
        put("replicates", self.replicates.to_string());
        put("seed", self.seed.to_string());
        put("output", self.output.display().to_string());
        put("fourier.xi", self.fourier_xi.to_text());
        put("fourier.regime", regime_name(self.regime).into());
        put("shells.cutoff", self.shells_cutoff.to_string());
        put("profile.points", self.profile_points.to_string());
        m
    }

    /// Canonical text form; parses back to an identical configuration.
    pub fn to_text(&self) -> String {
        let raw = self.to_raw();
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = raw.get(*key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<ExperimentConfig, Failure> {
        let mut raw = RawConfig::new();
        parse_into(&mut raw, text)?;
        ExperimentConfig::from_raw(&raw)
    }

    #[test]
    fn defaults_and_comments() {
        let c = parse("# nothing but defaults\n\n").unwrap();
        assert_eq!(c.dim, 2);
        assert_eq!(c.lattice, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(c.pairs(), vec![(0.05, 0.05)]);
        assert_eq!(c.seed, 0);
        let c = parse("dim = 3\na = 0.1, 0.05 # two scales\nb = a^2").unwrap();
        assert_eq!(c.lattice.len(), 9);
        assert_eq!(c.pairs(), vec![(0.1, 0.1 * 0.1), (0.05, 0.05 * 0.05)]);
    }

    #[test]
    fn geometric_grid() {
        let g = Grid::parse("a", "geometric(0.1, 0.025, 3)").unwrap();
        let v = g.values();
        assert_eq!(v.len(), 3);
        assert!((v[1] - 0.05).abs() < 1e-15 && (v[2] - 0.025).abs() < 1e-15);
        let c = parse("a = 0.1,0.2\nb = 0.5,0.25").unwrap();
        assert_eq!(c.pairs().len(), 4);
    }

    #[test]
    fn errors_name_the_key() {
        let bad = |text: &str| parse(text).unwrap_err().parameter.unwrap();
        assert_eq!(bad("lattice.matrix = 1,0,0,-1"), "lattice.matrix");
        assert_eq!(bad("lattice.matrix = 1,0,0"), "lattice.matrix");
        assert_eq!(bad("weight.lower = 0.8"), "weight.lower");
        assert_eq!(bad("a = 0.1,-0.2"), "a");
        assert_eq!(bad("psf.sigma = 0"), "psf.sigma");
        assert_eq!(bad("colour = red"), "colour");
        assert_eq!(bad("radius_density.lower = 0"), "radius_density.upper");
        assert_eq!(
            bad("radius_density.lower = 0\nradius_density.upper = 2"),
            "radius_density.lower"
        );
        assert_eq!(parse("no equals sign").unwrap_err().code, 2);
    }

    fn scale() -> impl Strategy<Value = f64> {
        (1e-4f64..10.0).prop_map(|v| v)
    }

    fn grid() -> impl Strategy<Value = Grid> {
        prop_oneof![
            prop::collection::vec(scale(), 1..5).prop_map(Grid::List),
            (scale(), scale(), 1usize..20).prop_map(|(start, stop, count)| Grid::Geometric {
                start,
                stop,
                count
            }),
        ]
    }

    fn config() -> impl Strategy<Value = ExperimentConfig> {
        let phantom = prop_oneof![
            (0.1f64..5.0).prop_map(|radius| PhantomSpec::Ball { radius }),
            (-1.0f64..1.0).prop_map(|offset| PhantomSpec::HalfSpace {
                normal: vec![1.0, 0.0],
                offset
            }),
        ];
        let psf = prop_oneof![
            (0.1f64..3.0).prop_map(|sigma| PsfKind::Gaussian { sigma }),
            (0.1f64..3.0).prop_map(|radius| PsfKind::CompactBump { radius }),
        ];
        let weight = prop_oneof![
            (0.05f64..0.45, 0.55f64..0.95)
                .prop_map(|(lower, upper)| WeightKind::Indicator { lower, upper }),
            (0.05f64..0.2, 0.25f64..0.4, 0.6f64..0.75, 0.8f64..0.95).prop_map(
                |(lower, rise_end, fall_start, upper)| {
                    WeightKind::SmoothPlateau {
                        lower,
                        rise_end,
                        fall_start,
                        upper,
                    }
                }
            ),
        ];
        let b = prop_oneof![
            Just(Resolution::SameAsA),
            Just(Resolution::SquareOfA),
            grid().prop_map(Resolution::Grid),
        ];
        (
            phantom,
            psf,
            weight,
            grid(),
            b,
            (0.5f64..2.0, -0.5f64..0.5, 0.5f64..2.0),
            prop::option::of((0.1f64..1.0, 1.5f64..3.0)),
            (100usize..100_000, any::<u64>()),
            grid(),
            prop_oneof![
                Just(Regime::Equal),
                Just(Regime::FineLattice),
                Just(Regime::CoarseLattice)
            ],
        )
            .prop_map(
                |(
                    phantom,
                    psf,
                    weight,
                    a,
                    b,
                    (m0, m1, m3),
                    radius_density,
                    (replicates, seed),
                    fourier_xi,
                    regime,
                )| {
                    ExperimentConfig {
                        dim: 2,
                        phantom,
                        psf,
                        weight,
                        amplitude: 1.0,
                        a,
                        b,
                        lattice: vec![m0, m1, 0.0, m3],
                        window: None,
                        radius_density,
                        replicates,
                        seed,
                        output: PathBuf::from("out"),
                        fourier_xi,
                        regime,
                        shells_cutoff: 3.5,
                        profile_points: 4097,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn text_round_trip_is_lossless(c in config()) {
            let text = c.to_text();
            let back = parse(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_text(), text);
        }
    }
}
