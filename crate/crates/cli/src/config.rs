//! Run configuration: flat `key = value` text grouped by `[section]`
//! headers. Every key is validated against a closed vocabulary, inapplicable
//! and unknown keys are hard errors, and the typed result re-serializes to a
//! canonical form whose hash identifies the run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rescomp::esn::Activation;
use rescomp::states::{BaseModifier, Nonlinear};
use rescomp::{Error, Result};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Standard,
    Deep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReservoirKind {
    Dense,
    Sparse,
    Cycle,
    DelayLine,
    DelayFeedback,
    PseudoSvd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Dense,
    Weighted,
    Minimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictMode {
    Generative,
    Predictive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    MackeyGlass,
    Lorenz,
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub variant: Variant,
    pub layers: usize,
    pub reservoir: ReservoirKind,
    pub reservoir_size: usize,
    pub spectral_radius: f64,
    pub density: f64,
    pub weight: f64,
    pub feedback: f64,
    pub max_value: f64,
    pub sparsity: f64,
    pub input: InputKind,
    pub input_scaling: f64,
    pub leak_rate: f64,
    pub activation: Activation,
    pub modifier: BaseModifier,
    pub nonlinear: Nonlinear,
    pub constant: f64,
    pub seed: u64,
    pub washout: usize,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub lambda: f64,
    pub train_len: usize,
}

#[derive(Debug, Clone)]
pub struct PredictConfig {
    pub mode: PredictMode,
    pub predict_len: usize,
}

#[derive(Debug, Clone)]
pub struct DataConfig {
    pub system: System,
    pub dt: f64,
    pub discard: usize,
    pub standardize: bool,
    // delayed-feedback system parameters
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n: f64,
    pub x0: f64,
    // three-variable flow parameters
    pub sigma: f64,
    pub rho: f64,
    pub u0: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub predict: PredictConfig,
    pub data: DataConfig,
}

impl Default for RunConfig {
    /// The benchmark recipe: dense uniform input and reservoir, spectral
    /// radius 1.25, ridge 1e-8, 4999-step training and prediction windows on
    /// the delayed feedback system with delay 17.
    fn default() -> Self {
        Self {
            model: ModelConfig {
                variant: Variant::Standard,
                layers: 1,
                reservoir: ReservoirKind::Dense,
                reservoir_size: 300,
                spectral_radius: 1.25,
                density: 0.05,
                weight: 0.9,
                feedback: 0.1,
                max_value: 1.0,
                sparsity: 0.5,
                input: InputKind::Dense,
                input_scaling: 1.0,
                leak_rate: 1.0,
                activation: Activation::Tanh,
                modifier: BaseModifier::Default,
                nonlinear: Nonlinear::None,
                constant: 1.0,
                seed: 1,
                washout: 0,
            },
            train: TrainConfig {
                lambda: 1e-8,
                train_len: 4999,
            },
            predict: PredictConfig {
                mode: PredictMode::Predictive,
                predict_len: 4999,
            },
            data: DataConfig {
                system: System::MackeyGlass,
                dt: 0.1,
                discard: 1000,
                standardize: false,
                tau: 17.0,
                beta: 0.2,
                gamma: 0.1,
                n: 10.0,
                x0: 1.2,
                sigma: 10.0,
                rho: 28.0,
                u0: [1.0, 0.0, 0.0],
            },
        }
    }
}

/// Raw parse result: (section, key) -> (value, line number), with every key
/// consumption tracked so leftovers can be reported as unknown keys.
struct RawConfig {
    entries: BTreeMap<(String, String), (String, usize)>,
    taken: BTreeMap<(String, String), bool>,
}

const SECTIONS: [&str; 4] = ["model", "train", "predict", "data"];

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::Malformed(format!("config line {lineno}: unterminated section header"))
                })?;
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::Malformed(format!(
                        "config line {lineno}: unknown section [{name}]; expected one of {}",
                        SECTIONS.map(|s| format!("[{s}]")).join(", ")
                    )));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Malformed(format!(
                    "config line {lineno}: expected `key = value`, got `{line}`"
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Malformed(format!(
                    "config line {lineno}: empty key"
                )));
            }
            let section = section.clone().ok_or_else(|| {
                Error::Malformed(format!(
                    "config line {lineno}: key `{key}` appears before any [section] header"
                ))
            })?;
            if entries
                .insert((section.clone(), key.clone()), (value, lineno))
                .is_some()
            {
                return Err(Error::Malformed(format!(
                    "config line {lineno}: duplicate key `{key}` in [{section}]"
                )));
            }
        }
        Ok(Self {
            entries,
            taken: BTreeMap::new(),
        })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let k = (section.to_string(), key.to_string());
        let found = self.entries.get(&k).cloned();
        if found.is_some() {
            self.taken.insert(k, true);
        }
        found
    }

    fn was_set(&self, section: &str, key: &str) -> bool {
        self.entries
            .contains_key(&(section.to_string(), key.to_string()))
    }

    fn finish(&self) -> Result<()> {
        for (section, key) in self.entries.keys() {
            if !self.taken.contains_key(&(section.clone(), key.clone())) {
                return Err(Error::Malformed(format!(
                    "unknown key `{key}` in [{section}]"
                )));
            }
        }
        Ok(())
    }
}

fn parse_value<T: std::str::FromStr>(
    section: &str,
    key: &str,
    value: &str,
    lineno: usize,
) -> Result<T> {
    value.parse().map_err(|_| {
        Error::Malformed(format!(
            "config line {lineno}: [{section}] {key} = `{value}` is not a valid {}",
            std::any::type_name::<T>()
        ))
    })
}

macro_rules! getter {
    ($name:ident, $ty:ty) => {
        fn $name(raw: &mut RawConfig, section: &str, key: &str, default: $ty) -> Result<$ty> {
            match raw.take(section, key) {
                Some((value, lineno)) => parse_value(section, key, &value, lineno),
                None => Ok(default),
            }
        }
    };
}

getter!(get_f64, f64);
getter!(get_usize, usize);
getter!(get_u64, u64);
getter!(get_bool, bool);

fn get_choice<T: Copy>(
    raw: &mut RawConfig,
    section: &str,
    key: &str,
    default: T,
    table: &[(&str, T)],
) -> Result<T> {
    match raw.take(section, key) {
        None => Ok(default),
        Some((value, lineno)) => table
            .iter()
            .find(|(name, _)| *name == value)
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                let allowed: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
                Error::Malformed(format!(
                    "config line {lineno}: [{section}] {key} = `{value}`; expected one of {}",
                    allowed.join(", ")
                ))
            }),
    }
}

fn reject_inapplicable(raw: &RawConfig, section: &str, keys: &[&str], context: &str) -> Result<()> {
    for key in keys {
        if raw.was_set(section, key) {
            return Err(Error::Malformed(format!(
                "key `{key}` in [{section}] does not apply when {context}"
            )));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::parse(text)?;
        let defaults = RunConfig::default();

        let variant = get_choice(
            &mut raw,
            "model",
            "variant",
            defaults.model.variant,
            &[("standard", Variant::Standard), ("deep", Variant::Deep)],
        )?;
        let layers = get_usize(&mut raw, "model", "layers", defaults.model.layers)?;
        if layers == 0 {
            return Err(Error::Malformed("[model] layers must be at least 1".into()));
        }
        if variant == Variant::Standard && layers != 1 {
            return Err(Error::Malformed(
                "[model] layers > 1 requires variant = deep".into(),
            ));
        }
        let reservoir = get_choice(
            &mut raw,
            "model",
            "reservoir",
            defaults.model.reservoir,
            &[
                ("dense", ReservoirKind::Dense),
                ("sparse", ReservoirKind::Sparse),
                ("cycle", ReservoirKind::Cycle),
                ("delay-line", ReservoirKind::DelayLine),
                ("delay-feedback", ReservoirKind::DelayFeedback),
                ("pseudo-svd", ReservoirKind::PseudoSvd),
            ],
        )?;
        match reservoir {
            ReservoirKind::Dense => reject_inapplicable(
                &raw,
                "model",
                &["density", "weight", "feedback", "max_value", "sparsity"],
                "reservoir = dense",
            )?,
            ReservoirKind::Sparse => reject_inapplicable(
                &raw,
                "model",
                &["weight", "feedback", "max_value", "sparsity"],
                "reservoir = sparse",
            )?,
            ReservoirKind::Cycle => reject_inapplicable(
                &raw,
                "model",
                &["spectral_radius", "density", "feedback", "max_value", "sparsity"],
                "reservoir = cycle",
            )?,
            ReservoirKind::DelayLine => reject_inapplicable(
                &raw,
                "model",
                &["spectral_radius", "density", "feedback", "max_value", "sparsity"],
                "reservoir = delay-line",
            )?,
            ReservoirKind::DelayFeedback => reject_inapplicable(
                &raw,
                "model",
                &["spectral_radius", "density", "max_value", "sparsity"],
                "reservoir = delay-feedback",
            )?,
            ReservoirKind::PseudoSvd => reject_inapplicable(
                &raw,
                "model",
                &["spectral_radius", "density", "weight", "feedback"],
                "reservoir = pseudo-svd",
            )?,
        }
        let reservoir_size =
            get_usize(&mut raw, "model", "reservoir_size", defaults.model.reservoir_size)?;
        if reservoir_size == 0 {
            return Err(Error::Malformed(
                "[model] reservoir_size must be positive".into(),
            ));
        }
        let spectral_radius = get_f64(
            &mut raw,
            "model",
            "spectral_radius",
            defaults.model.spectral_radius,
        )?;
        let density = get_f64(&mut raw, "model", "density", defaults.model.density)?;
        let weight = get_f64(&mut raw, "model", "weight", defaults.model.weight)?;
        let feedback = get_f64(&mut raw, "model", "feedback", defaults.model.feedback)?;
        let max_value = get_f64(&mut raw, "model", "max_value", defaults.model.max_value)?;
        let sparsity = get_f64(&mut raw, "model", "sparsity", defaults.model.sparsity)?;
        let input = get_choice(
            &mut raw,
            "model",
            "input",
            defaults.model.input,
            &[
                ("dense", InputKind::Dense),
                ("weighted", InputKind::Weighted),
                ("minimal", InputKind::Minimal),
            ],
        )?;
        let input_scaling =
            get_f64(&mut raw, "model", "input_scaling", defaults.model.input_scaling)?;
        let leak_rate = get_f64(&mut raw, "model", "leak_rate", defaults.model.leak_rate)?;
        let activation = get_choice(
            &mut raw,
            "model",
            "activation",
            defaults.model.activation,
            &[("tanh", Activation::Tanh), ("identity", Activation::Identity)],
        )?;
        let modifier = get_choice(
            &mut raw,
            "model",
            "modifier",
            defaults.model.modifier,
            &[
                ("default", BaseModifier::Default),
                ("extended", BaseModifier::Extended),
                ("padded", BaseModifier::Padded),
                ("padded-extended", BaseModifier::PaddedExtended),
            ],
        )?;
        if !matches!(modifier, BaseModifier::Padded | BaseModifier::PaddedExtended) {
            reject_inapplicable(
                &raw,
                "model",
                &["constant"],
                "the modifier has no padding slot",
            )?;
        }
        let nonlinear = get_choice(
            &mut raw,
            "model",
            "nonlinear",
            defaults.model.nonlinear,
            &[
                ("none", Nonlinear::None),
                ("t1", Nonlinear::T1),
                ("t2", Nonlinear::T2),
                ("t3", Nonlinear::T3),
            ],
        )?;
        let constant = get_f64(&mut raw, "model", "constant", defaults.model.constant)?;
        let seed = get_u64(&mut raw, "model", "seed", defaults.model.seed)?;
        let washout = get_usize(&mut raw, "model", "washout", defaults.model.washout)?;

        let lambda = get_f64(&mut raw, "train", "lambda", defaults.train.lambda)?;
        let train_len = get_usize(&mut raw, "train", "train_len", defaults.train.train_len)?;
        let mode = get_choice(
            &mut raw,
            "predict",
            "mode",
            defaults.predict.mode,
            &[
                ("generative", PredictMode::Generative),
                ("predictive", PredictMode::Predictive),
            ],
        )?;
        let predict_len =
            get_usize(&mut raw, "predict", "predict_len", defaults.predict.predict_len)?;

        let system = get_choice(
            &mut raw,
            "data",
            "system",
            defaults.data.system,
            &[
                ("mackey-glass", System::MackeyGlass),
                ("lorenz", System::Lorenz),
            ],
        )?;
        match system {
            System::MackeyGlass => reject_inapplicable(
                &raw,
                "data",
                &["sigma", "rho", "u0"],
                "system = mackey-glass",
            )?,
            System::Lorenz => reject_inapplicable(
                &raw,
                "data",
                &["tau", "gamma", "n", "x0"],
                "system = lorenz",
            )?,
        }
        let (dt_default, discard_default, beta_default) = match system {
            System::MackeyGlass => (0.1, 1000, 0.2),
            System::Lorenz => (0.02, 500, 8.0 / 3.0),
        };
        let dt = get_f64(&mut raw, "data", "dt", dt_default)?;
        let discard = get_usize(&mut raw, "data", "discard", discard_default)?;
        let standardize = get_bool(&mut raw, "data", "standardize", defaults.data.standardize)?;
        let tau = get_f64(&mut raw, "data", "tau", defaults.data.tau)?;
        let beta = get_f64(&mut raw, "data", "beta", beta_default)?;
        let gamma = get_f64(&mut raw, "data", "gamma", defaults.data.gamma)?;
        let n = get_f64(&mut raw, "data", "n", defaults.data.n)?;
        let x0 = get_f64(&mut raw, "data", "x0", defaults.data.x0)?;
        let sigma = get_f64(&mut raw, "data", "sigma", defaults.data.sigma)?;
        let rho = get_f64(&mut raw, "data", "rho", defaults.data.rho)?;
        let u0 = match raw.take("data", "u0") {
            None => defaults.data.u0,
            Some((value, lineno)) => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::Malformed(format!(
                        "config line {lineno}: [data] u0 needs three comma-separated values"
                    )));
                }
                let mut u0 = [0.0; 3];
                for (slot, part) in u0.iter_mut().zip(&parts) {
                    *slot = parse_value("data", "u0", part, lineno)?;
                }
                u0
            }
        };

        raw.finish()?;

        let config = RunConfig {
            model: ModelConfig {
                variant,
                layers,
                reservoir,
                reservoir_size,
                spectral_radius,
                density,
                weight,
                feedback,
                max_value,
                sparsity,
                input,
                input_scaling,
                leak_rate,
                activation,
                modifier,
                nonlinear,
                constant,
                seed,
                washout,
            },
            train: TrainConfig { lambda, train_len },
            predict: PredictConfig { mode, predict_len },
            data: DataConfig {
                system,
                dt,
                discard,
                standardize,
                tau,
                beta,
                gamma,
                n,
                x0,
                sigma,
                rho,
                u0,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        let m = &self.model;
        let checks: [(&str, bool); 9] = [
            ("[model] spectral_radius must be positive and finite",
                m.spectral_radius > 0.0 && m.spectral_radius.is_finite()),
            ("[model] density must lie in (0, 1]", m.density > 0.0 && m.density <= 1.0),
            ("[model] weight must be finite", m.weight.is_finite()),
            ("[model] feedback must be finite", m.feedback.is_finite()),
            ("[model] max_value must be positive and finite",
                m.max_value > 0.0 && m.max_value.is_finite()),
            ("[model] sparsity must lie in (0, 1)", m.sparsity > 0.0 && m.sparsity < 1.0),
            ("[model] input_scaling must be positive and finite",
                m.input_scaling > 0.0 && m.input_scaling.is_finite()),
            ("[model] leak_rate must lie in (0, 1]", m.leak_rate > 0.0 && m.leak_rate <= 1.0),
            ("[model] constant must be finite", m.constant.is_finite()),
        ];
        for (message, ok) in checks {
            if !ok {
                return Err(Error::Malformed(message.into()));
            }
        }
        if self.train.lambda < 0.0 || !self.train.lambda.is_finite() {
            return Err(Error::Malformed(
                "[train] lambda must be nonnegative and finite".into(),
            ));
        }
        if self.train.train_len == 0 {
            return Err(Error::Malformed("[train] train_len must be positive".into()));
        }
        if self.predict.predict_len == 0 {
            return Err(Error::Malformed(
                "[predict] predict_len must be positive".into(),
            ));
        }
        if self.model.washout >= self.train.train_len {
            return Err(Error::Malformed(format!(
                "[model] washout ({}) must be smaller than [train] train_len ({})",
                self.model.washout, self.train.train_len
            )));
        }
        if !(self.data.dt > 0.0 && self.data.dt.is_finite()) {
            return Err(Error::Malformed("[data] dt must be positive and finite".into()));
        }
        Ok(())
    }

    /// Deterministic re-serialization: fixed section and key order, only the
    /// keys that apply to the chosen kinds, full-precision numbers. Two
    /// configs describing the same run always canonicalize identically.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let m = &self.model;
        out.push_str("[model]\n");
        wkey(&mut out, "variant", match m.variant {
            Variant::Standard => "standard",
            Variant::Deep => "deep",
        });
        wnum(&mut out, "layers", m.layers as f64, true);
        wkey(&mut out, "reservoir", match m.reservoir {
            ReservoirKind::Dense => "dense",
            ReservoirKind::Sparse => "sparse",
            ReservoirKind::Cycle => "cycle",
            ReservoirKind::DelayLine => "delay-line",
            ReservoirKind::DelayFeedback => "delay-feedback",
            ReservoirKind::PseudoSvd => "pseudo-svd",
        });
        wnum(&mut out, "reservoir_size", m.reservoir_size as f64, true);
        match m.reservoir {
            ReservoirKind::Dense => {
                wnum(&mut out, "spectral_radius", m.spectral_radius, false);
            }
            ReservoirKind::Sparse => {
                wnum(&mut out, "spectral_radius", m.spectral_radius, false);
                wnum(&mut out, "density", m.density, false);
            }
            ReservoirKind::Cycle | ReservoirKind::DelayLine => {
                wnum(&mut out, "weight", m.weight, false);
            }
            ReservoirKind::DelayFeedback => {
                wnum(&mut out, "weight", m.weight, false);
                wnum(&mut out, "feedback", m.feedback, false);
            }
            ReservoirKind::PseudoSvd => {
                wnum(&mut out, "max_value", m.max_value, false);
                wnum(&mut out, "sparsity", m.sparsity, false);
            }
        }
        wkey(&mut out, "input", match m.input {
            InputKind::Dense => "dense",
            InputKind::Weighted => "weighted",
            InputKind::Minimal => "minimal",
        });
        wnum(&mut out, "input_scaling", m.input_scaling, false);
        wnum(&mut out, "leak_rate", m.leak_rate, false);
        wkey(&mut out, "activation", match m.activation {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        });
        wkey(&mut out, "modifier", modifier_name(m.modifier));
        wkey(&mut out, "nonlinear", nonlinear_name(m.nonlinear));
        if matches!(m.modifier, BaseModifier::Padded | BaseModifier::PaddedExtended) {
            wnum(&mut out, "constant", m.constant, false);
        }
        wnum(&mut out, "seed", m.seed as f64, true);
        wnum(&mut out, "washout", m.washout as f64, true);

        out.push_str("[train]\n");
        wnum(&mut out, "lambda", self.train.lambda, false);
        wnum(&mut out, "train_len", self.train.train_len as f64, true);

        out.push_str("[predict]\n");
        wkey(&mut out, "mode", match self.predict.mode {
            PredictMode::Generative => "generative",
            PredictMode::Predictive => "predictive",
        });
        wnum(&mut out, "predict_len", self.predict.predict_len as f64, true);

        let d = &self.data;
        out.push_str("[data]\n");
        wkey(&mut out, "system", match d.system {
            System::MackeyGlass => "mackey-glass",
            System::Lorenz => "lorenz",
        });
        wnum(&mut out, "dt", d.dt, false);
        wnum(&mut out, "discard", d.discard as f64, true);
        wkey(&mut out, "standardize", if d.standardize { "true" } else { "false" });
        match d.system {
            System::MackeyGlass => {
                wnum(&mut out, "tau", d.tau, false);
                wnum(&mut out, "beta", d.beta, false);
                wnum(&mut out, "gamma", d.gamma, false);
                wnum(&mut out, "n", d.n, false);
                wnum(&mut out, "x0", d.x0, false);
            }
            System::Lorenz => {
                wnum(&mut out, "sigma", d.sigma, false);
                wnum(&mut out, "rho", d.rho, false);
                wnum(&mut out, "beta", d.beta, false);
                let _ = writeln!(
                    out,
                    "u0 = {:.16e},{:.16e},{:.16e}",
                    d.u0[0], d.u0[1], d.u0[2]
                );
            }
        }
        out
    }

    /// Hex digest identifying the run setup.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_text().as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn modifier_name(base: BaseModifier) -> &'static str {
    match base {
        BaseModifier::Default => "default",
        BaseModifier::Extended => "extended",
        BaseModifier::Padded => "padded",
        BaseModifier::PaddedExtended => "padded-extended",
    }
}

pub fn nonlinear_name(nl: Nonlinear) -> &'static str {
    match nl {
        Nonlinear::None => "none",
        Nonlinear::T1 => "t1",
        Nonlinear::T2 => "t2",
        Nonlinear::T3 => "t3",
    }
}

fn wkey(out: &mut String, key: &str, value: &str) {
    let _ = writeln!(out, "{key} = {value}");
}

fn wnum(out: &mut String, key: &str, value: f64, integral: bool) {
    if integral {
        let _ = writeln!(out, "{key} = {}", value as u64);
    } else {
        let _ = writeln!(out, "{key} = {value:.16e}");
    }
}
