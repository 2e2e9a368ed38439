//! Python bindings: `import bargain`.

use std::sync::Arc;

use bargain_core::belief::{self, BeliefFamily, GridSpec, ThresholdBelief};
use bargain_core::empirics::{self, VoteRecord};
use bargain_core::game::{Allocation, GameSpec, InfoProtocol, Player, RecognitionModel};
use bargain_core::rational::{self, Q};
use bargain_core::sim::{self, Agents, LogitModel, ProposerAgent, Simulator, VoterAgent};
use bargain_core::spe::{self, Condition, EquilibriumSolution};
use bargain_core::{presets, reproduce};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Accepts a float or a string such as `"1/20"` or `"0.05"`.
fn exact(value: &Bound<'_, PyAny>) -> PyResult<Q> {
    let parsed = if let Ok(s) = value.extract::<String>() {
        rational::parse_decimal(&s)
    } else {
        rational::from_f64_decimal(value.extract::<f64>()?)
    };
    parsed.ok_or_else(|| err(format!("{value} is not a number")))
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None().into_bound(py),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    json_to_py(py, &serde_json::to_value(value).map_err(err)?)
}

/// A bargaining game: rounds, disclosure protocol, defaults and
/// recognition order.
#[pyclass(name = "Game", module = "bargain", frozen)]
struct PyGame {
    spec: GameSpec,
}

#[pymethods]
impl PyGame {
    #[new]
    #[pyo3(signature = (num_rounds, protocol, defaults, order=None, shrink_factor=None, id="custom"))]
    fn new(
        num_rounds: usize,
        protocol: &str,
        defaults: [Bound<'_, PyAny>; 3],
        order: Option<Vec<String>>,
        shrink_factor: Option<Bound<'_, PyAny>>,
        id: &str,
    ) -> PyResult<Self> {
        let protocol = InfoProtocol::parse(protocol).ok_or_else(|| err(format!("unknown protocol {protocol:?}")))?;
        let defaults = [exact(&defaults[0])?, exact(&defaults[1])?, exact(&defaults[2])?];
        let mut spec = GameSpec::new(id, num_rounds, protocol, defaults);
        if let Some(order) = order {
            let players = order
                .iter()
                .map(|p| Player::parse(p).ok_or_else(|| err(format!("unknown player {p:?}"))))
                .collect::<PyResult<Vec<_>>>()?;
            spec = spec.with_recognition(RecognitionModel::FixedOrder(players));
        }
        if let Some(delta) = shrink_factor {
            spec = spec.with_shrink_factor(exact(&delta)?);
        }
        Ok(PyGame { spec: spec.validate().map_err(err)? })
    }

    /// One of the named experimental treatments, e.g. `"3-partial"`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        presets::treatment(name).map(|spec| PyGame { spec }).ok_or_else(|| err(format!("unknown preset {name:?}")))
    }

    #[getter]
    fn id(&self) -> &str {
        &self.spec.id
    }

    #[getter]
    fn num_rounds(&self) -> usize {
        self.spec.num_rounds
    }

    #[getter]
    fn defaults(&self) -> [f64; 3] {
        self.spec.defaults_f64()
    }

    fn solve(&self) -> PyResult<PySolution> {
        Ok(PySolution { inner: Arc::new(spe::solve(&self.spec).map_err(err)?) })
    }

    fn __repr__(&self) -> String {
        format!("Game({:?}, rounds={}, protocol={})", self.spec.id, self.spec.num_rounds, self.spec.protocol)
    }
}

/// Subgame-perfect equilibrium of a game, in exact arithmetic.
#[pyclass(name = "Solution", module = "bargain", frozen)]
struct PySolution {
    inner: Arc<EquilibriumSolution>,
}

#[pymethods]
impl PySolution {
    /// Round-1 proposer's expected share as an exact fraction string.
    #[getter]
    fn first_share(&self) -> String {
        rational::display(&self.inner.first_share)
    }

    #[getter]
    fn first_share_float(&self) -> f64 {
        rational::to_f64(&self.inner.first_share)
    }

    /// `(round, condition, exact, float)` rows.
    fn share_table(&self) -> Vec<(usize, String, String, f64)> {
        self.inner
            .share_table()
            .into_iter()
            .map(|(r, c, q)| (r, c.to_string(), rational::display(&q), rational::to_f64(&q)))
            .collect()
    }

    #[pyo3(signature = (round, condition="unconditional"))]
    fn predicted_share(&self, round: usize, condition: &str) -> PyResult<String> {
        let condition = Condition::parse(condition).ok_or_else(|| err(format!("unknown condition {condition:?}")))?;
        spe::predicted_share(&self.inner, round, condition).map(|q| rational::display(&q)).map_err(err)
    }

    /// Every information state with its offers, continuation values and
    /// partner classes.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.inner.report_json())
    }

    fn check_structure(&self) -> PyResult<()> {
        spe::check_offer_structure(&self.inner).map_err(err)
    }
}

/// Proposer belief about the voters' acceptance thresholds.
#[pyclass(name = "Belief", module = "bargain", frozen)]
struct PyBelief {
    inner: ThresholdBelief,
}

impl PyBelief {
    fn make(family: BeliefFamily, d: f64) -> PyResult<Self> {
        Ok(PyBelief { inner: ThresholdBelief::new(family, d).map_err(err)? })
    }
}

#[pymethods]
impl PyBelief {
    #[staticmethod]
    #[pyo3(signature = (tau_bar=1.0, d=0.0))]
    fn independent_uniform(tau_bar: f64, d: f64) -> PyResult<Self> {
        Self::make(BeliefFamily::IndependentUniform { tau_bar }, d)
    }

    #[staticmethod]
    #[pyo3(signature = (tau_bar=1.0, d=0.0))]
    fn comonotone(tau_bar: f64, d: f64) -> PyResult<Self> {
        Self::make(BeliefFamily::Comonotone { tau_bar }, d)
    }

    #[staticmethod]
    #[pyo3(signature = (tau_bar=1.0, d=0.0))]
    fn antithetic(tau_bar: f64, d: f64) -> PyResult<Self> {
        Self::make(BeliefFamily::Antithetic { tau_bar }, d)
    }

    #[staticmethod]
    #[pyo3(signature = (rho, tau_bar=1.0, d=0.0))]
    fn gaussian_copula(rho: f64, tau_bar: f64, d: f64) -> PyResult<Self> {
        Self::make(BeliefFamily::GaussianCopula { tau_bar, rho }, d)
    }

    /// Atoms `(tau_b, tau_c, weight)`.
    #[staticmethod]
    #[pyo3(signature = (points, d=0.0))]
    fn discrete(points: Vec<(f64, f64, f64)>, d: f64) -> PyResult<Self> {
        Self::make(BeliefFamily::Discrete { points }, d)
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }

    fn positive_diagonal_mass(&self) -> bool {
        self.inner.positive_diagonal_mass()
    }

    /// Probability that at least one voter accepts.
    fn accept_prob(&self, s_b: f64, s_c: f64) -> PyResult<f64> {
        self.inner.lambda(s_b, s_c).map_err(err)
    }

    fn expected_payoff(&self, offer: [f64; 3]) -> PyResult<f64> {
        Ok(belief::expected_payoff(&Allocation::new(offer).map_err(err)?, &self.inner))
    }

    #[pyo3(signature = (step=0.005, refine_depth=3))]
    fn optimize<'py>(&self, py: Python<'py>, step: f64, refine_depth: u32) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &belief::optimize_offer(&self.inner, GridSpec { step, refine_depth }).map_err(err)?)
    }
}

/// Vote model `P(accept) = logistic(constant + strong * s + own_share * x + gini * g)`.
#[pyclass(name = "LogitModel", module = "bargain", frozen)]
struct PyLogit {
    inner: LogitModel,
}

#[pymethods]
impl PyLogit {
    #[new]
    fn new(constant: f64, strong: f64, own_share: f64, gini: f64) -> Self {
        PyLogit { inner: LogitModel::new(constant, strong, own_share, gini) }
    }

    /// A published column, numbered from 1.
    #[staticmethod]
    fn column(n: usize) -> PyResult<Self> {
        presets::logit_column(n).map(|c| PyLogit { inner: c.model }).ok_or_else(|| err(format!("no column {n}")))
    }

    fn coefficients(&self) -> [f64; 4] {
        self.inner.as_array()
    }

    fn accept_prob(&self, own_share: f64, strong: bool, gini: f64) -> f64 {
        sim::logit_accept_prob(&self.inner, own_share, strong, gini)
    }

    fn __repr__(&self) -> String {
        let [a, b, c, d] = self.inner.as_array();
        format!("LogitModel({a}, {b}, {c}, {d})")
    }
}

fn proposer_agent(kind: &str, shares: Option<[f64; 3]>, belief: Option<&PyBelief>) -> PyResult<ProposerAgent> {
    match (kind, shares, belief) {
        ("equilibrium", _, _) => Ok(ProposerAgent::Equilibrium),
        ("egalitarian_mwc", _, _) => Ok(ProposerAgent::egalitarian_mwc()),
        ("egalitarian_gc", _, _) => Ok(ProposerAgent::egalitarian_gc()),
        ("dictatorial", _, _) => Ok(ProposerAgent::dictatorial()),
        ("fixed", Some(s), _) => ProposerAgent::fixed(s).map_err(err),
        ("belief_opt", _, Some(b)) => ProposerAgent::belief_opt(&b.inner, GridSpec::default()).map_err(err),
        _ => Err(err(format!("proposer {kind:?} needs its argument (role_shares or belief)"))),
    }
}

/// Runs `n` seeded matches. Returns `(logs, summary)` where each log is a
/// dict. Voters are `"equilibrium"` unless `logit` is given.
#[pyfunction]
#[pyo3(signature = (game, n, seed, proposer="equilibrium", role_shares=None, belief=None, logit=None))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    game: &PyGame,
    n: usize,
    seed: u64,
    proposer: &str,
    role_shares: Option<[f64; 3]>,
    belief: Option<PyRef<'_, PyBelief>>,
    logit: Option<PyRef<'_, PyLogit>>,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let voter = logit.map_or(VoterAgent::Equilibrium, |l| VoterAgent::Logit { model: l.inner });
    let agents = Agents::uniform(proposer_agent(proposer, role_shares, belief.as_deref())?, voter);
    let simulator = Simulator::new(&game.spec, agents).map_err(err)?;
    let (logs, summary) = py.detach(|| simulator.run_batch(n, seed)).map_err(err)?;
    Ok((to_py(py, &logs)?, to_py(py, &summary)?))
}

/// Fits the vote logit to `(own_share, strong, gini, vote)` rows.
#[pyfunction]
fn fit_logit<'py>(py: Python<'py>, rows: Vec<(f64, bool, f64, bool)>) -> PyResult<Bound<'py, PyAny>> {
    let records: Vec<VoteRecord> = rows
        .into_iter()
        .enumerate()
        .map(|(i, (own_share, strong, gini, vote))| VoteRecord {
            treatment: "python".into(),
            match_id: i + 1,
            round: 1,
            voter: 2,
            own_share,
            strong_flag: u8::from(strong),
            gini,
            vote,
        })
        .collect();
    to_py(py, &empirics::fit_logit(&records).map_err(err)?)
}

#[pyfunction]
fn gini(shares: [f64; 3]) -> f64 {
    empirics::gini(&shares)
}

/// Expected first-proposer payoff over the offer simplex in role
/// coordinates (keep, weak partner, strong partner). Returns the optimum.
#[pyfunction]
#[pyo3(signature = (model, mrp, strong_flags=(false, true), step=0.005))]
fn surface<'py>(
    py: Python<'py>,
    model: &PyLogit,
    mrp: f64,
    strong_flags: (bool, bool),
    step: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let s = empirics::payoff_surface(&model.inner, mrp, [strong_flags.0, strong_flags.1], step).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("optimum", to_py(py, &s.optimum)?)?;
    out.set_item("mwc", s.optimum_is_mwc())?;
    out.set_item("targets_weak", s.optimum_targets_weak())?;
    out.set_item("cells", s.cells.len())?;
    Ok(out.into_any())
}

#[pyfunction]
fn presets_list() -> Vec<&'static str> {
    presets::TREATMENTS.to_vec()
}

/// Runs the reference checklist. Returns `(all_pass, report_text)`.
#[pyfunction]
fn run_checklist(py: Python<'_>) -> (bool, String) {
    let report = py.detach(|| reproduce::run_all(&reproduce::Expectations::default()));
    (report.all_pass(), report.to_text())
}

#[pymodule]
fn bargain(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGame>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyBelief>()?;
    m.add_class::<PyLogit>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit_logit, m)?)?;
    m.add_function(wrap_pyfunction!(gini, m)?)?;
    m.add_function(wrap_pyfunction!(surface, m)?)?;
    m.add_function(wrap_pyfunction!(run_checklist, m)?)?;
    m.add("presets", presets_list())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
