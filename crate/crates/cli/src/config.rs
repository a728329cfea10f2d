use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use torus_bundle::algebra::{Theta, TorusElement};
use torus_bundle::connections::Connection;
use torus_bundle::dirac::FluctuationA;
use torus_bundle::repr::{SpinStructure, TruncatedWindow};
use torus_bundle::spectral::IntegralOperator;
use torus_bundle::Complex64;

/// One term `(re + i·im)·U^(k,l,m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub k: i32,
    pub l: i32,
    pub m: i32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn build(theta: Theta, terms: &[Term], what: &str) -> anyhow::Result<TorusElement> {
    for (i, t) in terms.iter().enumerate() {
        if !(t.re.is_finite() && t.im.is_finite()) {
            bail!("{what}[{i}]: non-finite coefficient");
        }
    }
    Ok(TorusElement::from_terms(
        theta,
        terms.iter().map(|t| ([t.k, t.l, t.m], Complex64::new(t.re, t.im))),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OperatorChoice {
    Total,
    Base,
}

impl From<OperatorChoice> for IntegralOperator {
    fn from(o: OperatorChoice) -> Self {
        match o {
            OperatorChoice::Total => IntegralOperator::Total,
            OperatorChoice::Base => IntegralOperator::Base,
        }
    }
}

/// The full experiment description. Missing fields take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub theta: Theta,
    pub window: u32,
    /// `"e1,e2"` with each entry `0` or `1/2`.
    pub spin: String,
    /// Fluctuation components `A₁, A₂, A₃`.
    pub a: [Vec<Term>; 3],
    /// Connection components `ω₁, ω₂`.
    pub omega: [Vec<Term>; 2],
    pub ell: f64,
    pub experiment: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub random_samples: usize,
    pub format: Format,
    /// Fibres reported by `spectrum`; defaults to `0..=min(5, N)`.
    pub fibres: Option<Vec<i32>>,
    /// Integrand `b` for `nc-integral`.
    pub integrand: Vec<Term>,
    pub operator: OperatorChoice,
    /// Degree bound for the Hopf-Galois rank test and compatibility search.
    pub degree: i32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            theta: Theta::default(),
            window: 8,
            spin: "0,0".into(),
            a: Default::default(),
            omega: Default::default(),
            ell: 1.0,
            experiment: None,
            out: None,
            seed: 7,
            random_samples: 20,
            format: Format::Json,
            fibres: None,
            integrand: vec![Term {
                k: 0,
                l: 0,
                m: 0,
                re: 1.0,
                im: 0.0,
            }],
            operator: OperatorChoice::Total,
            degree: 3,
        }
    }
}

/// Flags that override individual config fields.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta21: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta31: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta32: Option<f64>,
    /// Truncation N: indices run over -N..=N.
    #[arg(long, global = true)]
    pub window: Option<u32>,
    /// Spin offsets, e.g. "0,1/2".
    #[arg(long, global = true)]
    pub spin: Option<String>,
    /// Fibre length.
    #[arg(long, global = true)]
    pub ell: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// The config file (if any) with flag overrides applied, validated.
    pub fn resolve(o: &Overrides, command: &str) -> anyhow::Result<Self> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(x) = o.theta21 {
            c.theta.t21 = x;
        }
        if let Some(x) = o.theta31 {
            c.theta.t31 = x;
        }
        if let Some(x) = o.theta32 {
            c.theta.t32 = x;
        }
        if let Some(x) = o.window {
            c.window = x;
        }
        if let Some(x) = &o.spin {
            c.spin = x.clone();
        }
        if let Some(x) = o.ell {
            c.ell = x;
        }
        if let Some(x) = o.seed {
            c.seed = x;
        }
        if let Some(x) = &o.out {
            c.out = Some(x.clone());
        }
        if let Some(x) = o.format {
            c.format = x;
        }
        if let Some(e) = &c.experiment {
            if e != command {
                bail!("config selects experiment {e:?} but the command is {command:?}");
            }
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> anyhow::Result<()> {
        let t = self.theta;
        if ![t.t21, t.t31, t.t32].iter().all(|x| x.is_finite()) {
            bail!("theta entries must be finite");
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            bail!("ell must be positive, got {}", self.ell);
        }
        if self.degree < 0 {
            bail!("degree must be nonnegative");
        }
        self.spin_structure()?;
        self.window()?;
        self.fluctuation()?;
        self.connection()?;
        self.integrand()?;
        Ok(())
    }

    pub fn spin_structure(&self) -> anyhow::Result<SpinStructure> {
        SpinStructure::parse(&self.spin).map_err(|e| anyhow::anyhow!("spin {:?}: {e}", self.spin))
    }

    pub fn window(&self) -> anyhow::Result<TruncatedWindow> {
        TruncatedWindow::new(self.window, self.spin_structure()?, self.theta)
            .map_err(|e| anyhow::anyhow!("window {}: {e}", self.window))
    }

    pub fn fluctuation(&self) -> anyhow::Result<FluctuationA> {
        let [a1, a2, a3] = &self.a;
        let parts = [
            build(self.theta, a1, "a[0]")?,
            build(self.theta, a2, "a[1]")?,
            build(self.theta, a3, "a[2]")?,
        ];
        let [x1, x2, x3] = parts;
        FluctuationA::new(x1, x2, x3).map_err(|e| anyhow::anyhow!("a: {e}"))
    }

    pub fn connection(&self) -> anyhow::Result<Connection> {
        let w1 = build(self.theta, &self.omega[0], "omega[0]")?;
        let w2 = build(self.theta, &self.omega[1], "omega[1]")?;
        Connection::new(w1, w2).map_err(|e| anyhow::anyhow!("omega: {e}"))
    }

    pub fn integrand(&self) -> anyhow::Result<TorusElement> {
        build(self.theta, &self.integrand, "integrand")
    }

    pub fn fibres(&self) -> Vec<i32> {
        self.fibres
            .clone()
            .unwrap_or_else(|| (0..=(self.window as i32).min(5)).collect())
    }
}
