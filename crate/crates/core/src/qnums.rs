//! Quantum-number bookkeeping: ladder coefficients for each dimensionality,
//! the excitation number `I`, and the kets spanning each invariant subspace.
//!
//! Oscillator labels are chain indices. For 1+1 and 2+1 the chain index is the
//! number state itself (`n`, `n_r`). For 3+1 the states `|N⟩ = |n (j±½, ½) j m_j⟩`
//! with fixed `j` form a chain starting at `N_min = j − ½`; the chain index is
//! `N − N_min`. `m_j` and the left-chiral 2+1 quanta never enter a matrix and are
//! not represented.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Error, Result};

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct HalfInt(i64);

impl HalfInt {
    pub const HALF: HalfInt = HalfInt(1);

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.value()
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > 1e15 {
            return domain(format!("{x} is not a half-integer"));
        }
        Ok(HalfInt(twice as i64))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `3/2`, `1.5` or `2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad half-integer '{s}'")))?;
            return match den.trim() {
                "2" => Ok(HalfInt(num)),
                "1" => Ok(HalfInt(2 * num)),
                _ => domain(format!("bad half-integer '{s}'")),
            };
        }
        let x: f64 = s
            .parse()
            .map_err(|_| Error::Domain(format!("bad half-integer '{s}'")))?;
        HalfInt::try_from(x)
    }
}

/// Which 3+1 level family a block belongs to.
///
/// `FiniteDeg`: `N = 2n + j + ½`, `μ = 2n + 2j + 2`.
/// `InfiniteDeg`: `N = 2n + j − ½`, `μ = 2n`; energies do not depend on `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchD3 {
    #[serde(rename = "finite")]
    FiniteDeg,
    #[serde(rename = "infinite")]
    InfiniteDeg,
}

impl fmt::Display for BranchD3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchD3::FiniteDeg => f.write_str("finite"),
            BranchD3::InfiniteDeg => f.write_str("infinite"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dim")]
pub enum Dimensionality {
    #[serde(rename = "1")]
    D1,
    #[serde(rename = "2")]
    D2,
    /// 3+1 needs the total angular momentum `j` of the chain and the level
    /// family used for branch-indexed queries.
    #[serde(rename = "3")]
    D3 { j: HalfInt, branch: BranchD3 },
}

impl Dimensionality {
    pub fn label(&self) -> &'static str {
        match self {
            Dimensionality::D1 => "1+1",
            Dimensionality::D2 => "2+1",
            Dimensionality::D3 { .. } => "3+1",
        }
    }

    /// `√k = f(k) / prefactor` holds for 1+1 and 2+1; 3+1 has no such form.
    pub fn ladder_prefactor(&self) -> Option<f64> {
        match self {
            Dimensionality::D1 => Some(1.0),
            Dimensionality::D2 => Some(SQRT_2),
            Dimensionality::D3 { .. } => None,
        }
    }
}

/// Which physical model is simulated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dim: Dimensionality,
    /// Oscillator–isospin coupling η.
    pub eta: f64,
    /// Oscillator–field-isospin coupling χ; only meaningful when `extended`.
    pub chi: f64,
    /// Rest energy mc², the detuning of the first isospin.
    pub mc2: f64,
    /// Splitting γ of the field isospin.
    pub gamma: f64,
    pub extended: bool,
}

impl ModelSpec {
    /// Single-isospin oscillator `mc²σ_z + η(σ₋A† + σ₊A)`.
    pub fn dmo(dim: Dimensionality, eta: f64, mc2: f64) -> Self {
        ModelSpec {
            dim,
            eta,
            chi: 0.0,
            mc2,
            gamma: 0.0,
            extended: false,
        }
    }

    /// Oscillator coupled to the isospin field (two atoms in a cavity).
    pub fn extended(dim: Dimensionality, eta: f64, chi: f64, mc2: f64, gamma: f64) -> Self {
        ModelSpec {
            dim,
            eta,
            chi,
            mc2,
            gamma,
            extended: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta", self.eta),
            ("chi", self.chi),
            ("mc2", self.mc2),
            ("gamma", self.gamma),
        ] {
            if !v.is_finite() {
                return domain(format!("{name} must be finite, got {v}"));
            }
        }
        if self.eta < 0.0 || self.chi < 0.0 {
            return domain("couplings eta and chi must be non-negative");
        }
        if !self.extended && self.chi != 0.0 {
            return usage("chi must be 0 for the single-isospin model");
        }
        if let Dimensionality::D3 { j, .. } = self.dim {
            if j.is_integer() || j.twice() < 1 {
                return domain(format!("j must be one of 1/2, 3/2, ..., got {j}"));
            }
        }
        Ok(())
    }

    /// Lowest oscillator level `N_min` of the chain (`j − ½` in 3+1, else 0).
    pub fn chain_bottom(&self) -> u32 {
        match self.dim {
            Dimensionality::D3 { j, .. } => ((j.twice() - 1) / 2) as u32,
            _ => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Sign {
    /// Eigenvalue of σ_z.
    pub const fn sz(self) -> i64 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisKet {
    pub iso1: Sign,
    /// Field isospin, present iff the model is extended.
    pub iso2: Option<Sign>,
    pub osc: u32,
}

impl BasisKet {
    pub const fn simple(iso1: Sign, osc: u32) -> Self {
        BasisKet {
            iso1,
            iso2: None,
            osc,
        }
    }

    pub const fn extended(iso1: Sign, iso2: Sign, osc: u32) -> Self {
        BasisKet {
            iso1,
            iso2: Some(iso2),
            osc,
        }
    }
}

impl fmt::Display for BasisKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.iso2 {
            Some(s2) => write!(f, "|{},{}',{}>", self.iso1.symbol(), s2.symbol(), self.osc),
            None => write!(f, "|{},{}>", self.iso1.symbol(), self.osc),
        }
    }
}

/// Ordered kets spanning one eigenspace of `I`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    pub invariant_value: HalfInt,
    pub kets: Vec<BasisKet>,
}

impl SubspaceBasis {
    /// `[|+, n−1⟩, |−, n⟩]`, or `[|−, 0⟩]` for `n = 0`.
    pub fn simple(n_excitations: u32) -> Self {
        let n = n_excitations;
        let kets = if n == 0 {
            vec![BasisKet::simple(Sign::Minus, 0)]
        } else {
            vec![
                BasisKet::simple(Sign::Plus, n - 1),
                BasisKet::simple(Sign::Minus, n),
            ]
        };
        SubspaceBasis {
            invariant_value: HalfInt::from_twice(2 * n as i64 - 1),
            kets,
        }
    }

    /// `[|−,−′,𝒩+1⟩, |+,−′,𝒩⟩, |−,+′,𝒩⟩, |+,+′,𝒩−1⟩]` with kets of negative
    /// oscillator index dropped.
    pub fn extended(invariant_value: i64) -> Result<Self> {
        if invariant_value < -1 {
            return domain(format!(
                "no extended kets carry I = {invariant_value} (minimum is -1)"
            ));
        }
        use Sign::{Minus, Plus};
        let n = invariant_value;
        let kets = [
            (Minus, Minus, n + 1),
            (Plus, Minus, n),
            (Minus, Plus, n),
            (Plus, Plus, n - 1),
        ]
        .into_iter()
        .filter(|&(_, _, osc)| osc >= 0)
        .map(|(s1, s2, osc)| BasisKet::extended(s1, s2, osc as u32))
        .collect();
        Ok(SubspaceBasis {
            invariant_value: HalfInt::from_int(n),
            kets,
        })
    }

    pub fn len(&self) -> usize {
        self.kets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kets.is_empty()
    }

    pub fn position(&self, ket: &BasisKet) -> Option<usize> {
        self.kets.iter().position(|k| k == ket)
    }

    pub fn max_osc(&self) -> u32 {
        self.kets.iter().map(|k| k.osc).max().unwrap_or(0)
    }
}

/// μ for the 3+1 oscillator: `2n + 2j + 2` on the finite branch, `2n` on the
/// infinite one. Linear value; the square root is taken by the caller.
pub fn mu(n: u32, j: HalfInt, branch: BranchD3) -> Result<f64> {
    if j.is_integer() || j.twice() < 1 {
        return domain(format!("j must be one of 1/2, 3/2, ..., got {j}"));
    }
    Ok(match branch {
        BranchD3::FiniteDeg => 2.0 * n as f64 + j.twice() as f64 + 2.0,
        BranchD3::InfiniteDeg => 2.0 * n as f64,
    })
}

/// Family and radial quantum number of the 3+1 level at chain index `k`.
///
/// The bottom level `N_min = j − ½` has `l = j − ½`; `s·a` flips `l` between
/// `j ∓ ½`, so even chain indices are on the infinite branch and odd ones on
/// the finite branch.
pub fn chain_class(k: u32) -> (BranchD3, u32) {
    if k % 2 == 0 {
        (BranchD3::InfiniteDeg, k / 2)
    } else {
        (BranchD3::FiniteDeg, (k - 1) / 2)
    }
}

/// Inverse of [`chain_class`].
pub fn chain_index(n: u32, branch: BranchD3) -> u32 {
    match branch {
        BranchD3::InfiniteDeg => 2 * n,
        BranchD3::FiniteDeg => 2 * n + 1,
    }
}

/// Matrix element of the ladder operator between chain indices
/// `osc_upper − 1` and `osc_upper`.
pub fn ladder_coefficient(spec: &ModelSpec, osc_upper: u32) -> Result<f64> {
    if osc_upper < 1 {
        return domain("ladder coefficient needs osc_upper >= 1");
    }
    match spec.dim {
        Dimensionality::D1 | Dimensionality::D2 => {
            let pre = spec.dim.ladder_prefactor().unwrap_or(1.0);
            Ok(pre * (osc_upper as f64).sqrt())
        }
        Dimensionality::D3 { j, .. } => {
            let (branch, n) = chain_class(osc_upper);
            Ok(mu(n, j, branch)?.sqrt())
        }
    }
}

/// Eigenvalue of `I` on a basis ket, in chain-index units.
pub fn invariant_of(ket: &BasisKet) -> HalfInt {
    let twice = 2 * ket.osc as i64 + ket.iso1.sz() + ket.iso2.map_or(0, Sign::sz);
    HalfInt::from_twice(twice)
}

pub fn basis_simple(spec: &ModelSpec, n_excitations: u32) -> Result<SubspaceBasis> {
    if spec.extended {
        return usage("basis_simple called on an extended model");
    }
    Ok(SubspaceBasis::simple(n_excitations))
}

pub fn basis_extended(spec: &ModelSpec, invariant_value: i64) -> Result<SubspaceBasis> {
    if !spec.extended {
        return usage("basis_extended called on a single-isospin model");
    }
    SubspaceBasis::extended(invariant_value)
}
