use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::Point2;
use crate::error::{Error, Result};
use crate::ris_optim::{DEFAULT_MAX_ROUNDS, DEFAULT_TOL};

/// Receiver chains a sweep can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Linear MMSE on the direct link, hard decisions, no decoding.
    Mmse,
    /// Linear MMSE with an optimised RIS, hard decisions, no decoding.
    Ris,
    /// Iterative detection and decoding without RIS.
    Idd,
    /// Iterative detection and decoding with an optimised RIS.
    RisIdd,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Mmse, Scheme::Ris, Scheme::Idd, Scheme::RisIdd];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Mmse => "mmse",
            Scheme::Ris => "ris",
            Scheme::Idd => "idd",
            Scheme::RisIdd => "ris_idd",
        }
    }

    /// Stable position in [`Scheme::ALL`], used to key random streams.
    pub fn index(self) -> u64 {
        self as u64
    }

    pub fn uses_ris(self) -> bool {
        matches!(self, Scheme::Ris | Scheme::RisIdd)
    }

    pub fn is_iterative(self) -> bool {
        matches!(self, Scheme::Idd | Scheme::RisIdd)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scheme {s:?}; expected one of mmse, ris, idd, ris_idd"
                ))
            })
    }
}

/// Array sizes. All three are required in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// AP antennas `M`.
    pub m: usize,
    /// RIS elements `N`.
    pub n: usize,
    /// Users `K`.
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub ap: [f64; 2],
    pub ris: [f64; 2],
    /// `L`: the user circle is centred at `(L, 0)`.
    pub user_center_x: f64,
    pub user_radius: f64,
    /// Draw user positions once per run instead of once per frame.
    pub freeze_positions: bool,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            ap: [0.0, -60.0],
            ris: [300.0, 10.0],
            user_center_x: 300.0,
            user_radius: 5.0,
            freeze_positions: false,
        }
    }
}

impl GeometryConfig {
    pub fn ap_point(&self) -> Point2 {
        Point2::new(self.ap[0], self.ap[1])
    }

    pub fn ris_point(&self) -> Point2 {
        Point2::new(self.ris[0], self.ris[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerConfig {
    pub ptx_dbm: Vec<f64>,
    pub noise_dbm: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            ptx_dbm: (0..8).map(|i| -2.0 + 2.0 * i as f64).collect(),
            noise_dbm: -100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodeConfig {
    pub n: usize,
    pub rate: f64,
    pub dv: usize,
    pub dc: usize,
    /// Seed of the parity-check construction.
    pub seed: u64,
    pub bp_iterations: usize,
    /// Directory for alist copies of the parity-check matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self {
            n: 512,
            rate: 0.5,
            dv: 3,
            dc: 6,
            seed: 1,
            bp_iterations: 20,
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReceiverConfig {
    pub idd_iterations: usize,
    pub ris_max_rounds: usize,
    pub ris_tol: f64,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            idd_iterations: 3,
            ris_max_rounds: DEFAULT_MAX_ROUNDS,
            ris_tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub schemes: Vec<Scheme>,
    pub frames_per_point: usize,
    pub master_seed: u64,
    pub output: PathBuf,
    /// Worker threads; all cores when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Also write the RIS optimiser traces next to the CSV.
    pub diagnostics: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            frames_per_point: 500,
            master_seed: 0,
            output: PathBuf::from("results.csv"),
            workers: None,
            diagnostics: false,
        }
    }
}

/// Fully resolved simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub system: SystemConfig,
    pub geometry: GeometryConfig,
    pub power: PowerConfig,
    pub code: CodeConfig,
    pub receiver: ReceiverConfig,
    pub run: RunConfig,
}

#[derive(Deserialize)]
struct RawSystem {
    m: Option<usize>,
    n: Option<usize>,
    k: Option<usize>,
}

#[derive(Deserialize)]
struct RawConfig {
    system: Option<RawSystem>,
    #[serde(default)]
    geometry: GeometryConfig,
    #[serde(default)]
    power: PowerConfig,
    #[serde(default)]
    code: CodeConfig,
    #[serde(default)]
    receiver: ReceiverConfig,
    #[serde(default)]
    run: RunConfig,
}

impl SimConfig {
    /// Defaults around the given array sizes.
    pub fn with_system(m: usize, n: usize, k: usize) -> Self {
        Self {
            system: SystemConfig { m, n, k },
            geometry: GeometryConfig::default(),
            power: PowerConfig::default(),
            code: CodeConfig::default(),
            receiver: ReceiverConfig::default(),
            run: RunConfig::default(),
        }
    }

    /// The full-size scenario: 32 antennas, 64 elements, 12 users.
    pub fn full_scale() -> Self {
        Self::with_system(32, 64, 12)
    }

    /// Parses TOML text. Returns the config and the dotted paths of keys
    /// that were not recognised.
    pub fn parse(text: &str) -> Result<(Self, Vec<String>)> {
        let mut unknown = Vec::new();
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(e.to_string()))?;
        let raw: RawConfig =
            serde_ignored::deserialize(de, |path| unknown.push(path.to_string().replace(".?", "")))
                .map_err(|e| Error::Config(e.to_string()))?;

        let sys = raw.system.unwrap_or(RawSystem {
            m: None,
            n: None,
            k: None,
        });
        let missing: Vec<&str> = [
            ("system.m", sys.m),
            ("system.n", sys.n),
            ("system.k", sys.k),
        ]
        .into_iter()
        .filter(|(_, v)| v.is_none())
        .map(|(name, _)| name)
        .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "missing required fields: {}",
                missing.join(", ")
            )));
        }
        let config = Self {
            system: SystemConfig {
                m: sys.m.unwrap_or_default(),
                n: sys.n.unwrap_or_default(),
                k: sys.k.unwrap_or_default(),
            },
            geometry: raw.geometry,
            power: raw.power,
            code: raw.code,
            receiver: raw.receiver,
            run: raw.run,
        };
        config.validate()?;
        unknown.sort();
        Ok((config, unknown))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let s = &self.system;
        if s.m == 0 || s.k == 0 {
            return bad("system.m and system.k must be at least 1".into());
        }

        let g = &self.geometry;
        let coords = [g.ap[0], g.ap[1], g.ris[0], g.ris[1], g.user_center_x];
        if coords.iter().any(|c| !c.is_finite()) {
            return bad("geometry coordinates must be finite".into());
        }
        if !(g.user_radius >= 0.0 && g.user_radius.is_finite()) {
            return bad(format!(
                "geometry.user_radius = {} is invalid",
                g.user_radius
            ));
        }
        // every link must stay beyond the 1 m reference distance
        let center = Point2::new(g.user_center_x, 0.0);
        let ap_user = g.ap_point().distance(&center) - g.user_radius;
        let ris_user = g.ris_point().distance(&center) - g.user_radius;
        let ap_ris = g.ap_point().distance(&g.ris_point());
        if ap_user < 1.0 || (s.n > 0 && (ris_user < 1.0 || ap_ris < 1.0)) {
            return bad("geometry places a user, the AP or the RIS closer than 1 m".into());
        }

        let p = &self.power;
        if p.ptx_dbm.is_empty() {
            return bad("power.ptx_dbm must not be empty".into());
        }
        if p.ptx_dbm.iter().any(|x| !x.is_finite()) || !p.noise_dbm.is_finite() {
            return bad("power levels must be finite".into());
        }
        if dbm_to_watts(p.noise_dbm) <= 0.0 {
            return bad(format!(
                "noise_dbm = {} underflows to zero watts",
                p.noise_dbm
            ));
        }

        let c = &self.code;
        if c.n == 0 || !c.n.is_multiple_of(2) {
            return bad(format!("code.n = {} must be positive and even", c.n));
        }
        if !(c.rate > 0.0 && c.rate < 1.0) {
            return bad(format!("code.rate = {} must lie in (0, 1)", c.rate));
        }
        if c.dv == 0 || c.dc <= c.dv {
            return bad(format!(
                "code degrees dv = {}, dc = {} are invalid",
                c.dv, c.dc
            ));
        }
        if c.bp_iterations == 0 {
            return bad("code.bp_iterations must be at least 1".into());
        }

        let r = &self.receiver;
        if r.idd_iterations == 0 {
            return bad("receiver.idd_iterations must be at least 1".into());
        }
        if r.ris_max_rounds == 0 || !(r.ris_tol > 0.0 && r.ris_tol.is_finite()) {
            return bad("receiver.ris_max_rounds must be >= 1 and ris_tol > 0".into());
        }

        let run = &self.run;
        if run.frames_per_point == 0 {
            return bad("run.frames_per_point must be at least 1".into());
        }
        if run.schemes.is_empty() {
            return bad("run.schemes must not be empty".into());
        }
        let mut seen = run.schemes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != run.schemes.len() {
            return bad("run.schemes lists a scheme twice".into());
        }
        if run.workers == Some(0) {
            return bad("run.workers must be at least 1".into());
        }
        Ok(())
    }
}

/// Reads and validates a TOML config, logging unrecognised keys.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (config, unknown) = SimConfig::parse(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    for key in unknown {
        log::warn!("{}: ignoring unknown key `{key}`", path.display());
    }
    Ok(config)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Symbol energy per user for transmit power `ptx_dbm` spread over a code
/// of rate `rate`.
pub fn effective_symbol_energy(ptx_dbm: f64, rate: f64) -> f64 {
    dbm_to_watts(ptx_dbm) * rate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_energy_examples() {
        assert!((effective_symbol_energy(30.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((effective_symbol_energy(30.0, 0.5) - 0.5).abs() < 1e-15);
        assert!((effective_symbol_energy(0.0, 0.5) - 5e-4).abs() < 1e-18);
        assert!((dbm_to_watts(-100.0) - 1e-13).abs() < 1e-27);
    }

    #[test]
    fn empty_file_lists_missing_fields() {
        let err = SimConfig::parse("").unwrap_err().to_string();
        for f in ["system.m", "system.n", "system.k"] {
            assert!(err.contains(f), "{err}");
        }
        let err = SimConfig::parse("[system]\nm = 4\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("system.n") && err.contains("system.k") && !err.contains("system.m"));
    }

    #[test]
    fn full_scale_defaults_round_trip() {
        let cfg = SimConfig::full_scale();
        let text = cfg.to_toml();
        let (back, unknown) = SimConfig::parse(&text).unwrap();
        assert!(unknown.is_empty());
        assert_eq!(back, cfg);
        assert_eq!((back.system.m, back.system.n, back.system.k), (32, 64, 12));
        assert_eq!(back.code.n, 512);
        assert_eq!(
            back.power.ptx_dbm,
            vec![-2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
        );

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        cfg.save(&path).unwrap();
        assert_eq!(load_config(&path).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_warn_only() {
        let (cfg, unknown) = SimConfig::parse(
            "colour = 3\n[system]\nm = 4\nn = 2\nk = 2\nextra = 1\n[run]\nfoo = \"x\"\n",
        )
        .unwrap();
        assert_eq!(cfg.system.m, 4);
        assert_eq!(unknown, vec!["colour", "run.foo", "system.extra"]);
    }

    #[test]
    fn invalid_values_rejected() {
        let base = "[system]\nm = 4\nn = 2\nk = 2\n";
        for extra in [
            "[run]\nframes_per_point = 0\n",
            "[power]\nptx_dbm = []\n",
            "[code]\nn = 511\n",
            "[code]\nrate = 1.5\n",
            "[receiver]\nidd_iterations = 0\n",
            "[run]\nschemes = [\"mmse\", \"mmse\"]\n",
            "[run]\nschemes = [\"zf\"]\n",
            "[geometry]\nuser_center_x = 0.0\nap = [0.0, 0.0]\n",
            "[system]\n",
        ] {
            assert!(
                SimConfig::parse(&format!("{base}{extra}")).is_err(),
                "{extra}"
            );
        }
        assert!(SimConfig::parse("[system]\nm = \"four\"\nn = 1\nk = 1\n").is_err());
    }

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("RIS".parse::<Scheme>().is_err());
    }
}
