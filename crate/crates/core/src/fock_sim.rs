//! Exact small-Hilbert-space checks of the SFG heralding picture.
//!
//! Two bases are used. [`FockKet`] labels photon numbers `(n_a, n_b, n_c)` of
//! the three interacting modes, evolved under `H = abc† + a†b†c` (in units of
//! `g`). [`TimeBinKet`] labels which time bin each photon of a four-photon
//! swapping experiment occupies, plus the time bin of the heralding SFG photon
//! produced by either of two nonlinear elements.
//!
//! The SFG generator conserves `n_a - n_b` and `n_a + n_c`, so it splits into
//! independent chains `|A-c, B-c, c⟩`, `c = 0..=min(A, B)`. Each chain is a
//! real symmetric tridiagonal block that is diagonalized exactly; there is no
//! series truncation in [`sfg_evolve`].

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numfmt::sci;

/// Anything usable as a basis label.
pub trait Ket: Clone + Ord + fmt::Display {}

impl<T: Clone + Ord + fmt::Display> Ket for T {}

/// Complex amplitudes over a sorted basis of unique kets.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<K: Ket> {
    basis: Vec<K>,
    amplitudes: Vec<Complex64>,
}

impl<K: Ket> StateVector<K> {
    /// Builds a state from `(ket, amplitude)` terms; repeated kets are an error.
    pub fn from_terms(terms: impl IntoIterator<Item = (K, Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (ket, amp) in terms {
            let label = ket.to_string();
            if map.insert(ket, amp).is_some() {
                return Err(Error::Input(format!("basis label {label} appears twice")));
            }
        }
        Ok(Self::from_map(map))
    }

    fn from_map(map: BTreeMap<K, Complex64>) -> Self {
        let (basis, amplitudes) = map.into_iter().unzip();
        Self { basis, amplitudes }
    }

    /// Sums repeated kets instead of rejecting them.
    fn accumulate(terms: impl IntoIterator<Item = (K, Complex64)>) -> Self {
        let mut map: BTreeMap<K, Complex64> = BTreeMap::new();
        for (ket, amp) in terms {
            *map.entry(ket).or_default() += amp;
        }
        Self::from_map(map)
    }

    pub fn basis(&self) -> &[K] {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Complex64)> {
        self.basis.iter().zip(&self.amplitudes)
    }

    /// Amplitude on `ket`, zero when the ket is not in the basis.
    pub fn amplitude(&self, ket: &K) -> Complex64 {
        self.basis
            .binary_search(ket)
            .map(|i| self.amplitudes[i])
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::Input("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            basis: self.basis.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a / norm).collect(),
        })
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.iter().map(|(k, a)| a.conj() * other.amplitude(k)).sum()
    }

    /// Text dump, one `label re im` line per basis ket in basis order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (ket, amp) in self.iter() {
            out.push_str(&format!("{ket} {} {}\n", sci(amp.re, 15), sci(amp.im, 15)));
        }
        out
    }
}

/// Photon numbers of the `a`, `b` and sum-frequency `c` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FockKet {
    pub na: u32,
    pub nb: u32,
    pub nc: u32,
}

impl FockKet {
    pub const fn new(na: u32, nb: u32, nc: u32) -> Self {
        Self { na, nb, nc }
    }

    fn max_occupation(&self) -> u32 {
        self.na.max(self.nb).max(self.nc)
    }
}

impl fmt::Display for FockKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}>", self.na, self.nb, self.nc)
    }
}

/// Single basis state `|ket⟩`.
pub fn fock_state(ket: FockKet) -> StateVector<FockKet> {
    StateVector {
        basis: vec![ket],
        amplitudes: vec![Complex64::new(1.0, 0.0)],
    }
}

/// `exp(-i·gt·(abc† + a†b†c))` on the space with every occupation below `cutoff`.
pub fn sfg_evolve(state: &StateVector<FockKet>, gt: f64, cutoff: u32) -> Result<StateVector<FockKet>> {
    if !(gt >= 0.0 && gt.is_finite()) {
        return Err(Error::domain("gt", gt, "must be finite and non-negative"));
    }
    // Gather amplitudes chain by chain; a chain is keyed by (A, B) = (n_a + n_c, n_b + n_c).
    let mut chains: BTreeMap<(u32, u32), Vec<(u32, Complex64)>> = BTreeMap::new();
    for (ket, amp) in state.iter() {
        if ket.max_occupation() >= cutoff {
            return Err(Error::Truncation {
                ket: ket.to_string(),
                reached: ket.to_string(),
                cutoff: cutoff as usize,
            });
        }
        let (a_tot, b_tot) = (ket.na + ket.nc, ket.nb + ket.nc);
        if a_tot >= cutoff || b_tot >= cutoff {
            let c = ket.nc;
            return Err(Error::Truncation {
                ket: ket.to_string(),
                reached: FockKet::new(ket.na + c, ket.nb + c, 0).to_string(),
                cutoff: cutoff as usize,
            });
        }
        chains.entry((a_tot, b_tot)).or_default().push((ket.nc, *amp));
    }

    let mut out = Vec::new();
    for ((a_tot, b_tot), members) in chains {
        let len = a_tot.min(b_tot) as usize + 1;
        let mut input = DVector::<Complex64>::zeros(len);
        for (c, amp) in members {
            input[c as usize] = amp;
        }
        let evolved = chain_propagator(a_tot, b_tot, gt) * input;
        for (c, amp) in evolved.iter().enumerate() {
            let c = c as u32;
            out.push((FockKet::new(a_tot - c, b_tot - c, c), *amp));
        }
    }
    Ok(StateVector::accumulate(out))
}

/// Tridiagonal block of the generator on the chain `|A-c, B-c, c⟩`.
fn chain_generator(a_tot: u32, b_tot: u32) -> DMatrix<f64> {
    let len = a_tot.min(b_tot) as usize + 1;
    let mut h = DMatrix::zeros(len, len);
    for c in 0..len - 1 {
        let cu = c as u32;
        let coupling = (((a_tot - cu) * (b_tot - cu) * (cu + 1)) as f64).sqrt();
        h[(c + 1, c)] = coupling;
        h[(c, c + 1)] = coupling;
    }
    h
}

fn chain_propagator(a_tot: u32, b_tot: u32, gt: f64) -> DMatrix<Complex64> {
    let h = chain_generator(a_tot, b_tot);
    let len = h.nrows();
    if len == 1 {
        return DMatrix::identity(1, 1);
    }
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors.map(Complex64::from);
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|lambda| Complex64::from_polar(1.0, -gt * lambda)));
    &v * phases * v.transpose()
}

/// Amplitude on `|n_a-1, n_b-1, 1⟩` after evolving `|n_a, n_b, 0⟩`.
pub fn herald_amplitude(na: u32, nb: u32, gt: f64) -> Result<Complex64> {
    if na == 0 || nb == 0 {
        return Err(Error::Input("SFG needs at least one photon in each input mode".into()));
    }
    let evolved = sfg_evolve(&fock_state(FockKet::new(na, nb, 0)), gt, na.max(nb) + 1)?;
    Ok(evolved.amplitude(&FockKet::new(na - 1, nb - 1, 1)))
}

/// First-order prediction `-i √(p_SFG n_a n_b)` with `p_SFG = (gt)²`.
pub fn leading_order_herald_amplitude(na: u32, nb: u32, p_sfg: f64) -> Complex64 {
    Complex64::new(0.0, -(p_sfg * (na * nb) as f64).sqrt())
}

/// Third-order remainder bound `(gt)² n_a n_b` on the relative error of the first-order law.
pub fn leading_order_error_bound(na: u32, nb: u32, gt: f64) -> f64 {
    gt * gt * (na * nb) as f64
}

/// Amplitudes of the intended and the spurious process when running the
/// interaction backwards as difference-frequency generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfgComparison {
    /// `|1,0,1⟩ → |2,1,0⟩`: the `c` photon splits, stimulated by the `a` photon.
    pub dfg_amp: Complex64,
    /// `|0,0,1⟩ → |1,1,0⟩`: the `c` photon splits with nothing to stimulate it.
    pub spdc_amp: Complex64,
}

impl DfgComparison {
    /// `|spdc| / |dfg|`
    pub fn ratio(&self) -> f64 {
        self.spdc_amp.norm() / self.dfg_amp.norm()
    }
}

pub fn dfg_spurious_amplitude(gt: f64) -> Result<DfgComparison> {
    let dfg = sfg_evolve(&fock_state(FockKet::new(1, 0, 1)), gt, 3)?;
    let spdc = sfg_evolve(&fock_state(FockKet::new(0, 0, 1)), gt, 2)?;
    Ok(DfgComparison {
        dfg_amp: dfg.amplitude(&FockKet::new(2, 1, 0)),
        spdc_amp: spdc.amplitude(&FockKet::new(1, 1, 0)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Bin {
    Early,
    Late,
}

impl Bin {
    fn letter(self) -> char {
        match self {
            Bin::Early => 'e',
            Bin::Late => 'l',
        }
    }
}

/// One occupied time-bin mode: a swapping photon or an SFG photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Mode {
    Photon { index: u8, bin: Bin },
    Sfg { element: u8, bin: Bin },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Photon { index, bin } => write!(f, "{}{}", bin.letter(), index),
            Mode::Sfg { element, bin } => write!(f, "{}S{}", bin.letter(), element),
        }
    }
}

/// Set of occupied modes, kept sorted by (photon index, bin).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeBinKet(Vec<Mode>);

impl TimeBinKet {
    pub fn new(mut modes: Vec<Mode>) -> Self {
        modes.sort();
        Self(modes)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.0
    }

    fn photon_bin(&self, index: u8) -> Option<Bin> {
        self.0.iter().find_map(|m| match m {
            Mode::Photon { index: i, bin } if *i == index => Some(*bin),
            _ => None,
        })
    }
}

impl fmt::Display for TimeBinKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "|vac>");
        }
        let labels: Vec<String> = self.0.iter().map(Mode::to_string).collect();
        write!(f, "|{}>", labels.join(","))
    }
}

fn photon(index: u8, bin: Bin) -> Mode {
    Mode::Photon { index, bin }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PhiPlus => "Phi+",
            BellLabel::PhiMinus => "Phi-",
            BellLabel::PsiPlus => "Psi+",
            BellLabel::PsiMinus => "Psi-",
        })
    }
}

/// Time-bin Bell state of photons `first` and `second`.
pub fn bell_pair(label: BellLabel, first: u8, second: u8) -> StateVector<TimeBinKet> {
    use Bin::{Early, Late};
    let (bins, sign) = match label {
        BellLabel::PhiPlus => ([(Early, Early), (Late, Late)], 1.0),
        BellLabel::PhiMinus => ([(Early, Early), (Late, Late)], -1.0),
        BellLabel::PsiPlus => ([(Early, Late), (Late, Early)], 1.0),
        BellLabel::PsiMinus => ([(Early, Late), (Late, Early)], -1.0),
    };
    let amp = [FRAC_1_SQRT_2, sign * FRAC_1_SQRT_2];
    StateVector::accumulate(bins.iter().zip(amp).map(|(&(b1, b2), a)| {
        (
            TimeBinKet::new(vec![photon(first, b1), photon(second, b2)]),
            Complex64::from(a),
        )
    }))
}

/// Tensor product of states on disjoint modes.
pub fn tensor(left: &StateVector<TimeBinKet>, right: &StateVector<TimeBinKet>) -> Result<StateVector<TimeBinKet>> {
    let mut terms = Vec::with_capacity(left.len() * right.len());
    for (kl, al) in left.iter() {
        for (kr, ar) in right.iter() {
            let mut modes = kl.0.clone();
            for m in &kr.0 {
                let clash = modes.iter().any(|x| match (x, m) {
                    (Mode::Photon { index: i, .. }, Mode::Photon { index: j, .. }) => i == j,
                    (Mode::Sfg { element: i, .. }, Mode::Sfg { element: j, .. }) => i == j,
                    _ => false,
                });
                if clash {
                    return Err(Error::Input(format!("{kl} and {kr} share a photon")));
                }
                modes.push(*m);
            }
            terms.push((TimeBinKet::new(modes), al * ar));
        }
    }
    StateVector::from_terms(terms)
}

/// How many SFG elements the measurement uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SfgElements {
    /// Only `e·e` and `l·l` bin pairs up-convert: resolves `Φ±`.
    One,
    /// A second element up-converts `e·l` and `l·e`: resolves all four.
    Two,
}

impl SfgElements {
    fn count(self) -> u8 {
        match self {
            SfgElements::One => 1,
            SfgElements::Two => 2,
        }
    }
}

/// Projection of the SFG photon of `element` onto `(|e⟩ ± |l⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SfgProjector {
    pub element: u8,
    pub plus: bool,
}

impl SfgProjector {
    /// The projector's vector over the SFG single-photon kets.
    pub fn vector(&self) -> StateVector<TimeBinKet> {
        let sign = if self.plus { 1.0 } else { -1.0 };
        let ket = |bin| {
            TimeBinKet::new(vec![Mode::Sfg {
                element: self.element,
                bin,
            }])
        };
        StateVector::accumulate([
            (ket(Bin::Early), Complex64::from(FRAC_1_SQRT_2)),
            (ket(Bin::Late), Complex64::from(sign * FRAC_1_SQRT_2)),
        ])
    }
}

impl fmt::Display for SfgProjector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sigma{}{}", self.element, if self.plus { '+' } else { '-' })
    }
}

/// The projectors available with the given number of elements.
pub fn sfg_projectors(elements: SfgElements) -> Vec<SfgProjector> {
    (1..=elements.count())
        .flat_map(|element| [true, false].map(|plus| SfgProjector { element, plus }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellOutcome {
    pub projector: SfgProjector,
    /// Bell state of photons 1 and 4 closest to the conditioned state; `None`
    /// when the outcome never occurs.
    pub label: Option<BellLabel>,
    /// Probability of this outcome relative to the norm of the input, with the
    /// overall SFG probability factored out.
    pub probability: f64,
    /// Renormalized state of photons 1 and 4 (unnormalized zero when `probability == 0`).
    pub conditioned_state: StateVector<TimeBinKet>,
}

/// Checks that `input` lives on one time bin per photon 1–4 and factorizes as (12)⊗(34).
fn check_swap_input(input: &StateVector<TimeBinKet>) -> Result<[[Complex64; 4]; 4]> {
    let mut matrix = [[Complex64::default(); 4]; 4];
    let index = |b: Bin| if b == Bin::Early { 0 } else { 1 };
    for (ket, amp) in input.iter() {
        let bins: Option<Vec<Bin>> = (1..=4).map(|i| ket.photon_bin(i)).collect();
        match bins {
            Some(b) if ket.0.len() == 4 => {
                matrix[2 * index(b[0]) + index(b[1])][2 * index(b[2]) + index(b[3])] = *amp;
            }
            _ => return Err(Error::Input(format!("{ket} is not a four-photon time-bin ket"))),
        }
    }
    let scale = input.norm_sqr();
    if scale == 0.0 {
        return Err(Error::Input("input state is zero".into()));
    }
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let minor = matrix[i][j] * matrix[k][l] - matrix[i][l] * matrix[k][j];
                    if minor.norm() > 1e-12 * scale {
                        return Err(Error::Input(
                            "input is not a product of a (1,2) and a (3,4) state".into(),
                        ));
                    }
                }
            }
        }
    }
    Ok(matrix)
}

/// Conditions a four-photon state on SFG of photons 2 and 3 and on each
/// projective outcome of the SFG photon.
pub fn swap_condition_on_sfg(input: &StateVector<TimeBinKet>, elements: SfgElements) -> Result<Vec<BellOutcome>> {
    check_swap_input(input)?;
    let total = input.norm_sqr();

    // Heralded state over (photon 1, photon 4, SFG photon).
    let heralded = StateVector::accumulate(input.iter().filter_map(|(ket, amp)| {
        let bin = |i| ket.photon_bin(i).expect("validated");
        let (b2, b3) = (bin(2), bin(3));
        let sfg = match (b2 == b3, elements) {
            (true, _) => Mode::Sfg { element: 1, bin: b2 },
            (false, SfgElements::Two) => Mode::Sfg { element: 2, bin: b2 },
            (false, SfgElements::One) => return None,
        };
        Some((TimeBinKet::new(vec![photon(1, bin(1)), photon(4, bin(4)), sfg]), *amp))
    }));

    let mut outcomes = Vec::new();
    for projector in sfg_projectors(elements) {
        let v = projector.vector();
        let conditioned = StateVector::accumulate(heralded.iter().filter_map(|(ket, amp)| {
            let sfg = ket.0.iter().find(|m| matches!(m, Mode::Sfg { .. }))?;
            let weight = v.amplitude(&TimeBinKet::new(vec![*sfg]));
            let rest: Vec<Mode> = ket
                .0
                .iter()
                .filter(|m| matches!(m, Mode::Photon { .. }))
                .copied()
                .collect();
            (weight != Complex64::default()).then(|| (TimeBinKet::new(rest), weight.conj() * amp))
        }));
        let probability = conditioned.norm_sqr() / total;
        let (label, conditioned_state) = if probability > 0.0 {
            let state = conditioned.normalized()?;
            let label = BellLabel::ALL
                .into_iter()
                .map(|l| (l, bell_fidelity(&state, l).expect("photons 1 and 4")))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(l, _)| l);
            (label, state)
        } else {
            (None, conditioned)
        };
        outcomes.push(BellOutcome {
            projector,
            label,
            probability,
            conditioned_state,
        });
    }
    Ok(outcomes)
}

/// `|⟨target|ψ⟩|²` for the (renormalized) state ψ of photons 1 and 4.
pub fn bell_fidelity(state: &StateVector<TimeBinKet>, target: BellLabel) -> Result<f64> {
    for ket in state.basis() {
        let ok = ket.0.len() == 2 && ket.photon_bin(1).is_some() && ket.photon_bin(4).is_some();
        if !ok {
            return Err(Error::Input(format!("{ket} is not a state of photons 1 and 4")));
        }
    }
    let state = state.normalized()?;
    Ok(bell_pair(target, 1, 4).inner(&state).norm_sqr())
}
