//! Plain-text sectioned key-value run configuration.
//!
//! The format is strict: unknown sections or keys are rejected with a line
//! diagnostic, values are validated against the solver types, and the
//! resolved configuration (all defaults made explicit) serializes back to
//! the same format so that a run is fully reproducible from its manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64 as C64;

use qedft_core::hamiltonian::{ExternalPair, HamiltonianSpec, SoftCoulomb, DEFAULT_DIM_BUDGET};
use qedft_core::lanczos::EigOptions;
use qedft_core::scf::{FieldInit, Mixing, SCFConfig, XcChoice};
use qedft_core::{Grid1D, ModeSet, ScalarField, TransverseCurrent};

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [model]
    pub length: f64,
    pub points: usize,
    pub electrons: usize,
    pub modes: Vec<i32>,
    pub coupling: f64,
    pub fock_cutoff: usize,
    pub interaction_strength: f64,
    pub interaction_softening: f64,
    pub dipole: bool,
    // [external]
    pub v_fourier: Vec<(i32, f64, f64)>,
    pub v_samples: Option<Vec<f64>>,
    pub j_modes: Vec<(i32, f64, f64)>,
    pub b_modes: Vec<(i32, f64, f64)>,
    // [solver]
    pub mixing: String,
    pub beta: f64,
    pub anderson_depth: usize,
    pub max_iterations: usize,
    pub tol_density: f64,
    pub tol_field: f64,
    pub field_init: String,
    pub eig_tol: f64,
    pub max_matvecs: usize,
    pub max_basis: usize,
    pub degeneracy_tol: f64,
    // [run]
    pub seed: u64,
    pub out: String,
    pub scan_count: usize,
    pub scan_amp_min: f64,
    pub scan_amp_max: f64,
    pub scan_eps_ext: f64,
    pub scan_eps_int: f64,
    pub scan_workers: usize,
    pub dim_budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            length: 10.0,
            points: 16,
            electrons: 2,
            modes: vec![1, 2],
            coupling: 0.05,
            fock_cutoff: 6,
            interaction_strength: 0.5,
            interaction_softening: 1.0,
            dipole: false,
            v_fourier: Vec::new(),
            v_samples: None,
            j_modes: Vec::new(),
            b_modes: Vec::new(),
            mixing: "linear".into(),
            beta: 0.3,
            anderson_depth: 5,
            max_iterations: 200,
            tol_density: 1e-8,
            tol_field: 1e-8,
            field_init: "zero".into(),
            eig_tol: 1e-10,
            max_matvecs: 6000,
            max_basis: 60,
            degeneracy_tol: 1e-8,
            seed: 1,
            out: "runs/out".into(),
            scan_count: 10,
            scan_amp_min: 0.05,
            scan_amp_max: 0.5,
            scan_eps_ext: 1e-2,
            scan_eps_int: 1e-6,
            scan_workers: 2,
            dim_budget: DEFAULT_DIM_BUDGET,
        }
    }
}

/// Raw `section.key -> value` map with line numbers for diagnostics.
fn tokenize(text: &str) -> Result<BTreeMap<(String, String), (String, usize)>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| anyhow!("line {line_no}: malformed section header `{raw}`"))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`, got `{raw}`"))?;
        if section.is_empty() {
            bail!("line {line_no}: key `{}` appears before any [section]", key.trim());
        }
        let prev = out.insert(
            (section.clone(), key.trim().to_string()),
            (value.trim().to_string(), line_no),
        );
        if prev.is_some() {
            bail!("line {line_no}: duplicate key `{section}.{}`", key.trim());
        }
    }
    Ok(out)
}

fn parse_triplets(value: &str, key: &str) -> Result<Vec<(i32, f64, f64)>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| {
            let parts: Vec<&str> = item.trim().split(':').collect();
            if parts.len() != 3 {
                bail!("key `{key}`: expected `mode:re:im` triplets, got `{item}`");
            }
            Ok((
                parts[0].trim().parse::<i32>().with_context(|| format!("key `{key}`: bad mode index `{}`", parts[0]))?,
                parts[1].trim().parse::<f64>().with_context(|| format!("key `{key}`: bad value `{}`", parts[1]))?,
                parts[2].trim().parse::<f64>().with_context(|| format!("key `{key}`: bad value `{}`", parts[2]))?,
            ))
        })
        .collect()
}

impl RunConfig {
    /// Strict parse; every recognized key overrides the documented default,
    /// anything else is an error.
    pub fn parse(text: &str) -> Result<Self> {
        let raw = tokenize(text)?;
        let mut config = Self::default();
        for ((section, key), (value, line_no)) in &raw {
            config
                .apply(section, key, value)
                .with_context(|| format!("line {line_no}: [{section}] {key} = {value}"))?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Apply one `section.key = value` assignment (also used by `--override`).
    pub fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| anyhow!("expected a number, got `{v}`"))
        };
        let parse_usize = |v: &str| -> Result<usize> {
            v.parse::<usize>().map_err(|_| anyhow!("expected a non-negative integer, got `{v}`"))
        };
        let parse_bool = |v: &str| -> Result<bool> {
            match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(anyhow!("expected true/false, got `{v}`")),
            }
        };
        match (section, key) {
            ("model", "length") => self.length = parse_f64(value)?,
            ("model", "points") => self.points = parse_usize(value)?,
            ("model", "electrons") => self.electrons = parse_usize(value)?,
            ("model", "modes") => {
                self.modes = value
                    .split(',')
                    .map(|m| {
                        m.trim()
                            .parse::<i32>()
                            .map_err(|_| anyhow!("bad mode index `{}`", m.trim()))
                    })
                    .collect::<Result<_>>()?;
            }
            ("model", "coupling") => self.coupling = parse_f64(value)?,
            ("model", "fock_cutoff") => self.fock_cutoff = parse_usize(value)?,
            ("model", "interaction_strength") => self.interaction_strength = parse_f64(value)?,
            ("model", "interaction_softening") => self.interaction_softening = parse_f64(value)?,
            ("model", "dipole") => self.dipole = parse_bool(value)?,
            ("external", "v_fourier") => self.v_fourier = parse_triplets(value, "v_fourier")?,
            ("external", "v_samples") => {
                if value.trim().is_empty() {
                    self.v_samples = None;
                } else {
                    self.v_samples = Some(
                        value
                            .split(',')
                            .map(|v| {
                                v.trim()
                                    .parse::<f64>()
                                    .map_err(|_| anyhow!("bad sample `{}`", v.trim()))
                            })
                            .collect::<Result<_>>()?,
                    );
                }
            }
            ("external", "j_modes") => self.j_modes = parse_triplets(value, "j_modes")?,
            ("external", "b_modes") => self.b_modes = parse_triplets(value, "b_modes")?,
            ("solver", "mixing") => {
                if value != "linear" && value != "anderson" {
                    bail!("mixing must be `linear` or `anderson`, got `{value}`");
                }
                self.mixing = value.to_string();
            }
            ("solver", "beta") => self.beta = parse_f64(value)?,
            ("solver", "anderson_depth") => self.anderson_depth = parse_usize(value)?,
            ("solver", "max_iterations") => self.max_iterations = parse_usize(value)?,
            ("solver", "tol_density") => self.tol_density = parse_f64(value)?,
            ("solver", "tol_field") => self.tol_field = parse_f64(value)?,
            ("solver", "field_init") => {
                if value != "zero" && value != "external" {
                    bail!("field_init must be `zero` or `external`, got `{value}`");
                }
                self.field_init = value.to_string();
            }
            ("solver", "eig_tol") => self.eig_tol = parse_f64(value)?,
            ("solver", "max_matvecs") => self.max_matvecs = parse_usize(value)?,
            ("solver", "max_basis") => self.max_basis = parse_usize(value)?,
            ("solver", "degeneracy_tol") => self.degeneracy_tol = parse_f64(value)?,
            ("run", "seed") => {
                self.seed =
                    value.parse::<u64>().map_err(|_| anyhow!("expected an integer seed"))?;
            }
            ("run", "out") => self.out = value.to_string(),
            ("run", "scan_count") => self.scan_count = parse_usize(value)?,
            ("run", "scan_amp_min") => self.scan_amp_min = parse_f64(value)?,
            ("run", "scan_amp_max") => self.scan_amp_max = parse_f64(value)?,
            ("run", "scan_eps_ext") => self.scan_eps_ext = parse_f64(value)?,
            ("run", "scan_eps_int") => self.scan_eps_int = parse_f64(value)?,
            ("run", "scan_workers") => self.scan_workers = parse_usize(value)?,
            ("run", "dim_budget") => self.dim_budget = parse_usize(value)?,
            _ => bail!("unknown key `{section}.{key}`"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.fock_cutoff == 0 {
            bail!("model.fock_cutoff: need n_max >= 1");
        }
        if !(1..=2).contains(&self.electrons) {
            bail!("model.electrons: the model supports 1 or 2 electrons");
        }
        if self.scan_amp_min > self.scan_amp_max {
            bail!("run.scan_amp_min exceeds run.scan_amp_max");
        }
        // Grid, modes, and the external pair are validated by construction.
        self.hamiltonian_spec().map(|_| ())
    }

    /// Canonical resolved text; parsing it reproduces `self` exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let triplets = |items: &[(i32, f64, f64)]| -> String {
            items
                .iter()
                .map(|(n, re, im)| format!("{n}:{re:.17e}:{im:.17e}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(s, "[model]").unwrap();
        writeln!(s, "length = {:.17e}", self.length).unwrap();
        writeln!(s, "points = {}", self.points).unwrap();
        writeln!(s, "electrons = {}", self.electrons).unwrap();
        writeln!(
            s,
            "modes = {}",
            self.modes.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ")
        )
        .unwrap();
        writeln!(s, "coupling = {:.17e}", self.coupling).unwrap();
        writeln!(s, "fock_cutoff = {}", self.fock_cutoff).unwrap();
        writeln!(s, "interaction_strength = {:.17e}", self.interaction_strength).unwrap();
        writeln!(s, "interaction_softening = {:.17e}", self.interaction_softening).unwrap();
        writeln!(s, "dipole = {}", self.dipole).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[external]").unwrap();
        writeln!(s, "v_fourier = {}", triplets(&self.v_fourier)).unwrap();
        if let Some(samples) = &self.v_samples {
            writeln!(
                s,
                "v_samples = {}",
                samples.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(", ")
            )
            .unwrap();
        }
        writeln!(s, "j_modes = {}", triplets(&self.j_modes)).unwrap();
        writeln!(s, "b_modes = {}", triplets(&self.b_modes)).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[solver]").unwrap();
        writeln!(s, "mixing = {}", self.mixing).unwrap();
        writeln!(s, "beta = {:.17e}", self.beta).unwrap();
        writeln!(s, "anderson_depth = {}", self.anderson_depth).unwrap();
        writeln!(s, "max_iterations = {}", self.max_iterations).unwrap();
        writeln!(s, "tol_density = {:.17e}", self.tol_density).unwrap();
        writeln!(s, "tol_field = {:.17e}", self.tol_field).unwrap();
        writeln!(s, "field_init = {}", self.field_init).unwrap();
        writeln!(s, "eig_tol = {:.17e}", self.eig_tol).unwrap();
        writeln!(s, "max_matvecs = {}", self.max_matvecs).unwrap();
        writeln!(s, "max_basis = {}", self.max_basis).unwrap();
        writeln!(s, "degeneracy_tol = {:.17e}", self.degeneracy_tol).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[run]").unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "out = {}", self.out).unwrap();
        writeln!(s, "scan_count = {}", self.scan_count).unwrap();
        writeln!(s, "scan_amp_min = {:.17e}", self.scan_amp_min).unwrap();
        writeln!(s, "scan_amp_max = {:.17e}", self.scan_amp_max).unwrap();
        writeln!(s, "scan_eps_ext = {:.17e}", self.scan_eps_ext).unwrap();
        writeln!(s, "scan_eps_int = {:.17e}", self.scan_eps_int).unwrap();
        writeln!(s, "scan_workers = {}", self.scan_workers).unwrap();
        writeln!(s, "dim_budget = {}", self.dim_budget).unwrap();
        s
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Ok(Grid1D::new(self.length, self.points)?)
    }

    pub fn mode_set(&self) -> Result<ModeSet> {
        Ok(ModeSet::new(&self.grid()?, &self.modes, self.coupling)?)
    }

    /// Assemble the solver-level spec from the configuration.
    pub fn hamiltonian_spec(&self) -> Result<HamiltonianSpec> {
        let grid = self.grid()?;
        let modes = self.mode_set()?;
        let potential = match &self.v_samples {
            Some(samples) => ScalarField::gauge_fixed(&grid, samples.clone())?,
            None => {
                let mut values = vec![0.0; grid.points()];
                for &(mode, amp_cos, amp_sin) in &self.v_fourier {
                    if mode == 0 {
                        bail!("external.v_fourier: mode 0 is a gauge constant, not allowed");
                    }
                    let k = 2.0 * std::f64::consts::PI * mode as f64 / grid.length();
                    for (i, v) in values.iter_mut().enumerate() {
                        *v += amp_cos * (k * grid.x(i)).cos() + amp_sin * (k * grid.x(i)).sin();
                    }
                }
                ScalarField::gauge_fixed(&grid, values)?
            }
        };
        let to_current = |items: &[(i32, f64, f64)], key: &str| -> Result<TransverseCurrent> {
            let pairs: Vec<(i32, C64)> =
                items.iter().map(|&(n, re, im)| (n, C64::new(re, im))).collect();
            TransverseCurrent::from_pairs(&modes, &pairs)
                .with_context(|| format!("external.{key}"))
        };
        let current = to_current(&self.j_modes, "j_modes")?;
        let mut external = ExternalPair::new(potential, current);
        if !self.b_modes.is_empty() {
            external = external.with_vector_potential(to_current(&self.b_modes, "b_modes")?);
        }
        let mut spec = HamiltonianSpec::new(
            grid,
            modes,
            self.electrons,
            external,
            SoftCoulomb {
                strength: self.interaction_strength,
                softening: self.interaction_softening,
            },
            self.fock_cutoff,
        );
        spec.dipole = self.dipole;
        spec.dim_budget = self.dim_budget;
        spec.validate()?;
        Ok(spec)
    }

    pub fn eig_options(&self) -> EigOptions {
        EigOptions {
            tol: self.eig_tol,
            max_matvecs: self.max_matvecs,
            max_basis: self.max_basis,
            seed: self.seed,
            degeneracy_tol: self.degeneracy_tol,
            ..Default::default()
        }
    }

    pub fn scf_config(&self) -> SCFConfig {
        SCFConfig {
            mixing: if self.mixing == "anderson" {
                Mixing::Anderson { depth: self.anderson_depth, beta: self.beta }
            } else {
                Mixing::Linear { beta: self.beta }
            },
            max_iterations: self.max_iterations,
            tol_density: self.tol_density,
            tol_field: self.tol_field,
            xc: XcChoice::MeanField,
            init: if self.field_init == "external" {
                FieldInit::ExternalOnly
            } else {
                FieldInit::Zero
            },
        }
    }
}
