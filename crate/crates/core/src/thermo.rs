//! Thermodynamic oracles: pressure of locally constant potentials, closed-form
//! partition growth rates and the correlation entropy.
//!
//! For a Gibbs measure with potential `psi`, the growth rate of
//! `sum_w theta([w])^q` equals `P(q psi) - q P(psi)`. Both sides are computed
//! here by different routes: the pressure by power iteration on the weighted
//! transfer matrix, the growth rate by repeated squaring of the measure's own
//! `q`-powered transition matrix (or the direct sum for Bernoulli models).

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, scale_log};
use crate::measure::{MeasureModel, ModelKind};
use crate::perron::{log_radius_by_squaring, perron_right, DEFAULT_REL_TOL};
use crate::symbolic::{ShiftSpace, Word};

const SQUARINGS: u32 = 12;

/// A potential constant on cylinders of length `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    r: usize,
    table: BTreeMap<Word, f64>,
}

impl Potential {
    /// The table must cover exactly the admissible words of length `r`.
    /// Values may be `-inf` (a forbidden transition of a Markov chain).
    pub fn new(space: &ShiftSpace, r: usize, table: BTreeMap<Word, f64>) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParameter(format!(
                "potential locality r must be at least 2, got {r}"
            )));
        }
        for (w, v) in &table {
            if w.len() != r {
                return Err(Error::InvalidParameter(format!(
                    "potential word {w} has length {}, expected {r}",
                    w.len()
                )));
            }
            space.check_word(w)?;
            if v.is_nan() || *v == f64::INFINITY {
                return Err(Error::InvalidParameter(format!("potential value at {w} is {v}")));
            }
        }
        for w in space.words_of_length(r) {
            if !table.contains_key(&w) {
                return Err(Error::InvalidParameter(format!(
                    "potential table is missing word {w}"
                )));
            }
        }
        Ok(Potential { r, table })
    }

    pub fn locality(&self) -> usize {
        self.r
    }

    pub fn value(&self, w: &Word) -> f64 {
        self.table[w]
    }

    pub fn table(&self) -> &BTreeMap<Word, f64> {
        &self.table
    }

    pub fn scaled(&self, q: f64) -> Potential {
        Potential {
            r: self.r,
            table: self
                .table
                .iter()
                .map(|(w, v)| (w.clone(), scale_log(q, *v)))
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.table.values().all(|v| v.is_finite())
    }
}

/// The transfer matrix over admissible words of length `r - 1`:
/// `M[u][v] = exp(psi(u v_last))` when `v` is the shift of `u` followed by an
/// admissible symbol.
pub(crate) struct TransferMatrix {
    pub states: Vec<Word>,
    pub entries: Vec<Vec<f64>>,
    /// Log weights, `-inf` where no transition exists.
    pub log_entries: Vec<Vec<f64>>,
}

impl TransferMatrix {
    pub fn new(space: &ShiftSpace, potential: &Potential) -> Self {
        let width = potential.r - 1;
        let states = space.words_of_length(width);
        let index: HashMap<Word, usize> = states
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let n = states.len();
        let mut log_entries = vec![vec![f64::NEG_INFINITY; n]; n];
        for (i, u) in states.iter().enumerate() {
            for c in space.children(u) {
                let next = Word::from(&c.symbols()[1..]);
                let j = index[&next];
                log_entries[i][j] = potential.value(&c);
            }
        }
        let entries = log_entries
            .iter()
            .map(|row| row.iter().map(|x| x.exp()).collect())
            .collect();
        TransferMatrix {
            states,
            entries,
            log_entries,
        }
    }
}

/// Pressure `P(q psi)`: log of the Perron root of the `q psi`-weighted
/// transfer matrix.
pub fn pressure(space: &ShiftSpace, psi: &Potential, q: f64) -> Result<f64> {
    if !space.is_irreducible() {
        return Err(Error::Reducible);
    }
    let scaled = psi.scaled(q);
    let transfer = TransferMatrix::new(space, &scaled);
    if transfer
        .log_entries
        .iter()
        .flatten()
        .any(|&x| x == f64::INFINITY)
    {
        return Ok(f64::INFINITY);
    }
    Ok(perron_right(&transfer.entries, DEFAULT_REL_TOL)?.log_root)
}

/// Growth rate `lim (1/n) log sum_{|w| = n} Psi_q(theta([w]))` in closed form.
///
/// Bernoulli: `log sum_i p_i^q` (`+inf` for `q < 0` with a null symbol).
/// Markov and Gibbs: log spectral radius of the entrywise `q`-power of the
/// transition matrix on admissible transitions, computed by repeated
/// squaring. Admissible transitions of probability zero follow the `Psi_q`
/// conventions; inadmissible ones stay zero.
pub fn closed_form_h(model: &MeasureModel, q: f64) -> Result<f64> {
    match model.kind() {
        ModelKind::Bernoulli { p } => {
            if q == 0.0 {
                return Ok((p.len() as f64).ln());
            }
            if q < 0.0 && p.iter().any(|&x| x == 0.0) {
                return Ok(f64::INFINITY);
            }
            Ok(log_sum_exp(
                p.iter().filter(|&&x| x > 0.0).map(|x| q * x.ln()),
            ))
        }
        ModelKind::Markov { .. } | ModelKind::Gibbs { .. } => {
            let chain = model.chain().expect("chain models carry a chain");
            let n = chain.states.len();
            let mut matrix = vec![vec![0.0; n]; n];
            for (s, row) in chain.step.iter().enumerate() {
                for &(next, log_p) in row.iter().flatten() {
                    let w = scale_log(q, log_p);
                    if w == f64::INFINITY {
                        return Ok(f64::INFINITY);
                    }
                    matrix[s][next] = w.exp();
                }
            }
            Ok(log_radius_by_squaring(&matrix, SQUARINGS))
        }
        ModelKind::Mixture { .. } => Err(Error::UnsupportedModel("mixture")),
    }
}

/// `|g(q) - (P(q psi) - q P(psi))|` with `g` from [`closed_form_h`] and `psi`
/// the model's defining potential.
pub fn gibbs_identity_residual(model: &MeasureModel, q: f64) -> Result<f64> {
    let psi = model
        .potential()
        .ok_or(Error::UnsupportedModel("mixture"))?;
    let g = closed_form_h(model, q)?;
    let space = model.space();
    let p_q = pressure(space, &psi, q)?;
    let p_1 = pressure(space, &psi, 1.0)?;
    let rhs = p_q - q * p_1;
    if g.is_infinite() && g == rhs {
        return Ok(0.0);
    }
    Ok((g - rhs).abs())
}

/// Finite-`n` correlation entropy
/// `(1 / ((1 - q) n)) log sum_w theta([w]) theta([w])^(q - 1)` over admissible
/// words of length `n + k` with positive mass.
pub fn correlation_entropy(model: &MeasureModel, q: f64, n: usize, k: usize) -> Result<f64> {
    if q == 1.0 {
        return Err(Error::InvalidParameter(
            "correlation entropy is singular at q = 1".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let log_sum = model.log_moment_sum(n + k, q)?;
    Ok(log_sum / ((1.0 - q) * n as f64))
}
