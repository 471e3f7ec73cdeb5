//! Exact state-vector algebra over small registers of labeled qubits.
//!
//! States are dense complex amplitude vectors over an ordered register of
//! [`QubitLabel`]s. The first label in the register is the most significant
//! bit of the amplitude index, and the computational basis is read as
//! `|g⟩ ↔ 0`, `|e⟩ ↔ 1`, so printed kets match register order left to right.
//! Measured qubits are removed from the register instead of being kept
//! collapsed, so a consumed atom cannot be reused by mistake.

use num_complex::Complex64;
use rand::Rng;
use std::fmt;
use thiserror::Error;

/// Absolute tolerance for structural checks (norms, unitarity).
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for orthonormality of a supplied measurement basis.
pub const BASIS_TOL: f64 = 1e-10;
/// Default tolerance for state equality up to a global phase.
pub const STATE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("duplicate qubit label {0}")]
    DuplicateQubit(QubitLabel),
    #[error("qubit label {0} is not in the register")]
    UnknownQubit(QubitLabel),
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("state vector is not normalized (norm = {0})")]
    NotNormalized(f64),
    #[error("matrix is not unitary (max residual = {0})")]
    NotUnitary(f64),
    #[error("supplied basis is not orthonormal and complete: {0}")]
    BadBasis(String),
}

/// Which atom group a qubit belongs to. `Probe` labels an eavesdropper's
/// ancilla; the five letters are the protocol's atom groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    A,
    B,
    C,
    D,
    E,
    Probe,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::A => write!(f, "A"),
            Role::B => write!(f, "B"),
            Role::C => write!(f, "C"),
            Role::D => write!(f, "D"),
            Role::E => write!(f, "E"),
            Role::Probe => write!(f, "probe"),
        }
    }
}

/// A labeled qubit: group role plus 1-based position within its group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitLabel {
    pub role: Role,
    pub index: u32,
}

impl QubitLabel {
    pub const fn new(role: Role, index: u32) -> Self {
        QubitLabel { role, index }
    }
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.role, self.index)
    }
}

/// Shorthand for protocol atoms, e.g. `q(Role::A, 3)` is atom A_3.
pub const fn q(role: Role, index: u32) -> QubitLabel {
    QubitLabel::new(role, index)
}

/// Measurement basis: computational `{|g⟩, |e⟩}` or superposition `{|+⟩, |-⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasBasis {
    Z,
    X,
}

impl fmt::Display for MeasBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasBasis::Z => write!(f, "Z"),
            MeasBasis::X => write!(f, "X"),
        }
    }
}

/// A two-bit code, used both for the four single-atom unitaries and for the
/// cells of the code tables. Stored as a value in `0..=3`, most significant
/// bit first when rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code2(u8);

impl Code2 {
    pub fn new(value: u8) -> Self {
        assert!(value < 4, "two-bit code out of range: {value}");
        Code2(value)
    }

    pub fn from_bits(hi: bool, lo: bool) -> Self {
        Code2((hi as u8) << 1 | lo as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn bits(self) -> (bool, bool) {
        (self.0 & 2 != 0, self.0 & 1 != 0)
    }

    pub fn as_str(self) -> &'static str {
        ["00", "01", "10", "11"][self.0 as usize]
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "00" => Some(Code2(0)),
            "01" => Some(Code2(1)),
            "10" => Some(Code2(2)),
            "11" => Some(Code2(3)),
            _ => None,
        }
    }

    pub const ALL: [Code2; 4] = [Code2(0), Code2(1), Code2(2), Code2(3)];
}

impl fmt::Display for Code2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// The four two-atom maximally entangled states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    /// Code of the single-atom unitary that maps `|ψ-⟩` (applied to the first
    /// atom) to this kind, up to a global phase.
    pub fn code(self) -> Code2 {
        match self {
            BellKind::PsiMinus => Code2::new(0b00),
            BellKind::PhiMinus => Code2::new(0b01),
            BellKind::PhiPlus => Code2::new(0b10),
            BellKind::PsiPlus => Code2::new(0b11),
        }
    }

    pub fn from_code(code: Code2) -> Self {
        match code.value() {
            0b00 => BellKind::PsiMinus,
            0b01 => BellKind::PhiMinus,
            0b10 => BellKind::PhiPlus,
            _ => BellKind::PsiPlus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// The two four-state blocks the eight three-atom entangled states split into.
/// A round prepares the `S-` reference for `SP` or the `Q-` reference for `QR`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GhzFamily {
    SP,
    QR,
}

impl GhzFamily {
    /// The kind prepared in bulk for this family (code `00`).
    pub fn reference(self) -> GhzKind {
        match self {
            GhzFamily::SP => GhzKind::SMinus,
            GhzFamily::QR => GhzKind::QMinus,
        }
    }

    /// The family's bit in the hidden payload: 1 for `SP`, 0 for `QR`.
    pub fn bit(self) -> bool {
        matches!(self, GhzFamily::SP)
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            GhzFamily::SP
        } else {
            GhzFamily::QR
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GhzFamily::SP => "SP",
            GhzFamily::QR => "QR",
        }
    }

    /// Kinds of this family in block order (row order of the code tables).
    pub fn kinds(self) -> [GhzKind; 4] {
        match self {
            GhzFamily::SP => [
                GhzKind::SPlus,
                GhzKind::SMinus,
                GhzKind::PPlus,
                GhzKind::PMinus,
            ],
            GhzFamily::QR => [
                GhzKind::QPlus,
                GhzKind::QMinus,
                GhzKind::RPlus,
                GhzKind::RMinus,
            ],
        }
    }
}

impl fmt::Display for GhzFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// The eight three-atom maximally entangled states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GhzKind {
    SPlus,
    SMinus,
    PPlus,
    PMinus,
    QPlus,
    QMinus,
    RPlus,
    RMinus,
}

impl GhzKind {
    pub const ALL: [GhzKind; 8] = [
        GhzKind::SPlus,
        GhzKind::SMinus,
        GhzKind::PPlus,
        GhzKind::PMinus,
        GhzKind::QPlus,
        GhzKind::QMinus,
        GhzKind::RPlus,
        GhzKind::RMinus,
    ];

    pub fn family(self) -> GhzFamily {
        match self {
            GhzKind::SPlus | GhzKind::SMinus | GhzKind::PPlus | GhzKind::PMinus => GhzFamily::SP,
            _ => GhzFamily::QR,
        }
    }

    /// Code of the single-atom unitary that maps the family reference
    /// (`|S-⟩` or `|Q-⟩`, applied to the first atom) to this kind, up to a
    /// global phase.
    pub fn code(self) -> Code2 {
        match self {
            GhzKind::SMinus | GhzKind::QMinus => Code2::new(0b00),
            GhzKind::PMinus | GhzKind::RMinus => Code2::new(0b01),
            GhzKind::PPlus | GhzKind::RPlus => Code2::new(0b10),
            GhzKind::SPlus | GhzKind::QPlus => Code2::new(0b11),
        }
    }

    pub fn from_family_code(family: GhzFamily, code: Code2) -> Self {
        match (family, code.value()) {
            (GhzFamily::SP, 0b00) => GhzKind::SMinus,
            (GhzFamily::SP, 0b01) => GhzKind::PMinus,
            (GhzFamily::SP, 0b10) => GhzKind::PPlus,
            (GhzFamily::SP, _) => GhzKind::SPlus,
            (GhzFamily::QR, 0b00) => GhzKind::QMinus,
            (GhzFamily::QR, 0b01) => GhzKind::RMinus,
            (GhzFamily::QR, 0b10) => GhzKind::RPlus,
            (GhzFamily::QR, _) => GhzKind::QPlus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GhzKind::SPlus => "S+",
            GhzKind::SMinus => "S-",
            GhzKind::PPlus => "P+",
            GhzKind::PMinus => "P-",
            GhzKind::QPlus => "Q+",
            GhzKind::QMinus => "Q-",
            GhzKind::RPlus => "R+",
            GhzKind::RMinus => "R-",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for GhzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A square complex matrix checked to be unitary on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    entries: Vec<Complex64>,
}

impl Unitary {
    /// Builds a unitary from row-major entries. The dimension must be a power
    /// of two and the unitarity residual must stay below [`NORM_TOL`].
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, StateError> {
        if !dim.is_power_of_two() || entries.len() != dim * dim {
            return Err(StateError::ShapeError(format!(
                "expected a {dim}x{dim} matrix over a power-of-two dimension, got {} entries",
                entries.len()
            )));
        }
        let u = Unitary { dim, entries };
        let residual = u.unitarity_residual();
        if residual > NORM_TOL {
            return Err(StateError::NotUnitary(residual));
        }
        Ok(u)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Unitary { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Max-norm of `U†U - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.entry(k, i).conj() * self.entry(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }

    /// Largest entry-wise difference to another matrix.
    pub fn max_abs_diff(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// True when `self = c * other` for some unit complex `c`.
    pub fn equal_up_to_global_phase(&self, other: &Unitary, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let (k, _) = other
            .entries
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm().total_cmp(&b.norm()))
            .expect("matrix is nonempty");
        if other.entries[k].norm() < NORM_TOL {
            return false;
        }
        let c = self.entries[k] / other.entries[k];
        let c = if c.norm() < NORM_TOL { c } else { c / c.norm() };
        self.entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| (a - c * b).norm() <= tol)
    }
}

/// The single-atom coding unitaries: `00` identity, `01` bit flip,
/// `10` the flip with a sign (`|g⟩⟨e| - |e⟩⟨g|`), `11` phase flip.
pub fn pauli_gate(code: Code2) -> Unitary {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let neg = Complex64::new(-1.0, 0.0);
    let entries = match code.value() {
        0b00 => vec![one, z, z, one],
        0b01 => vec![z, one, one, z],
        0b10 => vec![z, one, neg, z],
        _ => vec![one, z, z, neg],
    };
    Unitary { dim: 2, entries }
}

/// The Hadamard rotation between the two measurement bases.
pub fn hadamard() -> Unitary {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Unitary {
        dim: 2,
        entries: vec![h, h, h, -h],
    }
}

/// A normalized pure state over an ordered register of labeled qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    register: Vec<QubitLabel>,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state, checking register uniqueness, length and normalization.
    pub fn new(register: Vec<QubitLabel>, amps: Vec<Complex64>) -> Result<Self, StateError> {
        for (i, label) in register.iter().enumerate() {
            if register[..i].contains(label) {
                return Err(StateError::DuplicateQubit(*label));
            }
        }
        if amps.len() != 1usize << register.len() {
            return Err(StateError::ShapeError(format!(
                "{} amplitudes for a {}-qubit register",
                amps.len(),
                register.len()
            )));
        }
        let state = StateVector { register, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Single qubit in `|g⟩` (`excited = false`) or `|e⟩`.
    pub fn basis_qubit(label: QubitLabel, excited: bool) -> Self {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let amps = if excited { vec![z, one] } else { vec![one, z] };
        StateVector {
            register: vec![label],
            amps,
        }
    }

    /// Single qubit in `|+⟩` (`minus = false`) or `|-⟩`.
    pub fn x_basis_qubit(label: QubitLabel, minus: bool) -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let amps = if minus { vec![h, -h] } else { vec![h, h] };
        StateVector {
            register: vec![label],
            amps,
        }
    }

    pub fn register(&self) -> &[QubitLabel] {
        &self.register
    }

    pub fn qubit_count(&self) -> usize {
        self.register.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, basis_index: usize) -> Complex64 {
        self.amps[basis_index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn position_of(&self, label: QubitLabel) -> Result<usize, StateError> {
        self.register
            .iter()
            .position(|l| *l == label)
            .ok_or(StateError::UnknownQubit(label))
    }

    /// Basis indices whose amplitude magnitude exceeds `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// Tensor product; registers must be disjoint.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, StateError> {
        for label in &other.register {
            if self.register.contains(label) {
                return Err(StateError::DuplicateQubit(*label));
            }
        }
        let mut register = self.register.clone();
        register.extend_from_slice(&other.register);
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { register, amps })
    }

    /// Applies `u` to the listed target qubits (first target is the most
    /// significant bit of the gate basis), identity elsewhere.
    pub fn apply(&self, u: &Unitary, targets: &[QubitLabel]) -> Result<StateVector, StateError> {
        let k = targets.len();
        if u.dim() != 1 << k {
            return Err(StateError::ShapeError(format!(
                "{}-dim gate applied to {k} qubits",
                u.dim()
            )));
        }
        let mut positions = Vec::with_capacity(k);
        for t in targets {
            let p = self.position_of(*t)?;
            if positions.contains(&p) {
                return Err(StateError::DuplicateQubit(*t));
            }
            positions.push(p);
        }
        let n = self.register.len();
        // Bit shift (from the right) for each target, MSB-first convention.
        let shifts: Vec<usize> = positions.iter().map(|p| n - 1 - p).collect();
        let dim = self.amps.len();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        let gate_dim = u.dim();
        for base in 0..dim {
            // Visit each index once, as the representative with all target bits zero.
            if shifts.iter().any(|s| base >> s & 1 == 1) {
                continue;
            }
            let mut idx = [0usize; 1 << 4];
            assert!(k <= 4, "gates above 4 qubits are not needed here");
            for (t, slot) in idx.iter_mut().take(gate_dim).enumerate() {
                let mut i = base;
                for (bit_pos, s) in shifts.iter().enumerate() {
                    if t >> (k - 1 - bit_pos) & 1 == 1 {
                        i |= 1 << s;
                    }
                }
                *slot = i;
            }
            for row in 0..gate_dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, source) in idx.iter().take(gate_dim).enumerate() {
                    acc += u.entry(row, col) * self.amps[*source];
                }
                out[idx[row]] = acc;
            }
        }
        Ok(StateVector {
            register: self.register.clone(),
            amps: out,
        })
    }

    /// Measures one qubit, returning the outcome bit and the collapsed state
    /// with the measured qubit removed. Outcome `false` is `g` (`Z`) or `+`
    /// (`X`); `true` is `e` or `-`.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        target: QubitLabel,
        basis: MeasBasis,
        rng: &mut R,
    ) -> Result<(bool, StateVector), StateError> {
        let rotated = match basis {
            MeasBasis::Z => self.clone(),
            MeasBasis::X => self.apply(&hadamard(), &[target])?,
        };
        let pos = rotated.position_of(target)?;
        let n = rotated.register.len();
        let shift = n - 1 - pos;
        let p_one: f64 = rotated
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i >> shift & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let outcome = rng.gen::<f64>() < p_one;
        let post = rotated.project_out(pos, outcome);
        Ok((outcome, post))
    }

    /// Keeps amplitudes whose bit at register position `pos` equals `bit`,
    /// removes the qubit, and renormalizes.
    fn project_out(&self, pos: usize, bit: bool) -> StateVector {
        let n = self.register.len();
        let shift = n - 1 - pos;
        let mut amps = Vec::with_capacity(self.amps.len() / 2);
        for (i, a) in self.amps.iter().enumerate() {
            if (i >> shift & 1 == 1) == bit {
                amps.push(*a);
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        let mut register = self.register.clone();
        register.remove(pos);
        StateVector { register, amps }
    }

    /// Projective measurement onto a supplied orthonormal basis of the target
    /// subspace. Returns the basis index and the collapsed remainder with the
    /// targets removed.
    pub fn measure_in_state_basis<R: Rng + ?Sized>(
        &self,
        targets: &[QubitLabel],
        basis_states: &[StateVector],
        rng: &mut R,
    ) -> Result<(usize, StateVector), StateError> {
        let t = targets.len();
        if basis_states.len() != 1 << t {
            return Err(StateError::BadBasis(format!(
                "{} states supplied for a {t}-qubit subspace",
                basis_states.len()
            )));
        }
        let mut basis = Vec::with_capacity(basis_states.len());
        for b in basis_states {
            basis.push(b.reordered(targets)?);
        }
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..basis[i].amps.len() {
                    acc += basis[i].amps[k].conj() * basis[j].amps[k];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                if (acc - expect).norm() > BASIS_TOL {
                    return Err(StateError::BadBasis(format!(
                        "Gram residual {:.3e} between states {i} and {j}",
                        (acc - expect).norm()
                    )));
                }
            }
        }

        // Move targets to the front so the amplitude index splits as
        // (target bits, rest bits).
        let mut order: Vec<QubitLabel> = targets.to_vec();
        for label in &self.register {
            if !targets.contains(label) {
                order.push(*label);
            }
        }
        let arranged = self.reordered(&order)?;
        let rest_bits = order.len() - t;
        let rest_dim = 1usize << rest_bits;

        let mut coeffs: Vec<Vec<Complex64>> = Vec::with_capacity(basis.len());
        let mut probs = Vec::with_capacity(basis.len());
        for b in &basis {
            let mut c = vec![Complex64::new(0.0, 0.0); rest_dim];
            for (tb, b_amp) in b.amps.iter().enumerate() {
                if b_amp.norm() == 0.0 {
                    continue;
                }
                let base = tb << rest_bits;
                for (r, slot) in c.iter_mut().enumerate() {
                    *slot += b_amp.conj() * arranged.amps[base + r];
                }
            }
            probs.push(c.iter().map(|x| x.norm_sqr()).sum::<f64>());
            coeffs.push(c);
        }

        let draw: f64 = rng.gen();
        let mut cumulative = 0.0;
        let mut picked = basis.len() - 1;
        for (k, p) in probs.iter().enumerate() {
            cumulative += p;
            if draw < cumulative {
                picked = k;
                break;
            }
        }

        let norm = probs[picked].sqrt();
        let amps: Vec<Complex64> = coeffs[picked].iter().map(|c| c / norm).collect();
        let register: Vec<QubitLabel> = order[t..].to_vec();
        Ok((picked, StateVector { register, amps }))
    }

    /// Same state expressed over a permuted register order.
    pub fn reordered(&self, new_order: &[QubitLabel]) -> Result<StateVector, StateError> {
        if new_order.len() != self.register.len() {
            return Err(StateError::ShapeError(format!(
                "register sizes differ: {} vs {}",
                new_order.len(),
                self.register.len()
            )));
        }
        let mut perm = Vec::with_capacity(new_order.len());
        for label in new_order {
            perm.push(self.position_of(*label)?);
        }
        let n = self.register.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (old_idx, a) in self.amps.iter().enumerate() {
            let mut new_idx = 0usize;
            for (new_pos, old_pos) in perm.iter().enumerate() {
                let bit = old_idx >> (n - 1 - old_pos) & 1;
                new_idx |= bit << (n - 1 - new_pos);
            }
            amps[new_idx] = *a;
        }
        Ok(StateVector {
            register: new_order.to_vec(),
            amps,
        })
    }

    /// True when `self = c * other` for some unit complex `c`, after
    /// reordering `other` into this register order.
    pub fn equal_up_to_global_phase(
        &self,
        other: &StateVector,
        tol: f64,
    ) -> Result<bool, StateError> {
        let other = other.reordered(&self.register)?;
        // Phase reference from the largest amplitude of `other`.
        let (k, _) = other
            .amps
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm().total_cmp(&b.norm()))
            .expect("state is nonempty");
        if self.amps[k].norm() < tol && other.amps[k].norm() >= tol {
            return Ok(false);
        }
        let c = self.amps[k] / other.amps[k];
        let c = if c.norm() == 0.0 { c } else { c / c.norm() };
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .all(|(a, b)| (a - c * b).norm() <= tol))
    }

    /// Exact per-amplitude comparison (no phase freedom), after reordering.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64, StateError> {
        let other = other.reordered(&self.register)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `|φ±⟩ = (|gg⟩ ± |ee⟩)/√2`, `|ψ±⟩ = (|ge⟩ ± |eg⟩)/√2` on default labels D1, E1.
pub fn make_bell(kind: BellKind) -> StateVector {
    make_bell_on(kind, q(Role::D, 1), q(Role::E, 1))
}

/// Bell state over two explicit labels, first label most significant.
pub fn make_bell_on(kind: BellKind, first: QubitLabel, second: QubitLabel) -> StateVector {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let amps = match kind {
        BellKind::PhiPlus => vec![h, z, z, h],
        BellKind::PhiMinus => vec![h, z, z, -h],
        BellKind::PsiPlus => vec![z, h, h, z],
        BellKind::PsiMinus => vec![z, h, -h, z],
    };
    StateVector {
        register: vec![first, second],
        amps,
    }
}

/// The eight three-atom states on default labels A1, B1, C1:
/// `|S±⟩ = (|gee⟩ ± |egg⟩)/√2`, `|P±⟩ = (|ggg⟩ ± |eee⟩)/√2`,
/// `|Q±⟩ = (|gge⟩ ± |eeg⟩)/√2`, `|R±⟩ = (|geg⟩ ± |ege⟩)/√2`.
pub fn make_ghz(kind: GhzKind) -> StateVector {
    make_ghz_on(kind, q(Role::A, 1), q(Role::B, 1), q(Role::C, 1))
}

/// GHZ state over three explicit labels, first label most significant.
pub fn make_ghz_on(
    kind: GhzKind,
    first: QubitLabel,
    second: QubitLabel,
    third: QubitLabel,
) -> StateVector {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    // (index of the positive ket, index of the signed ket)
    let (hi, lo, sign) = match kind {
        GhzKind::SPlus => (0b011, 0b100, 1.0),
        GhzKind::SMinus => (0b011, 0b100, -1.0),
        GhzKind::PPlus => (0b000, 0b111, 1.0),
        GhzKind::PMinus => (0b000, 0b111, -1.0),
        GhzKind::QPlus => (0b001, 0b110, 1.0),
        GhzKind::QMinus => (0b001, 0b110, -1.0),
        GhzKind::RPlus => (0b010, 0b101, 1.0),
        GhzKind::RMinus => (0b010, 0b101, -1.0),
    };
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[hi] = h;
    amps[lo] = h * sign;
    StateVector {
        register: vec![first, second, third],
        amps,
    }
}

/// The four Bell states over two labels, in [`BellKind::ALL`] order.
pub fn bell_basis_on(first: QubitLabel, second: QubitLabel) -> Vec<StateVector> {
    BellKind::ALL
        .into_iter()
        .map(|k| make_bell_on(k, first, second))
        .collect()
}

/// The eight GHZ states over three labels, in [`GhzKind::ALL`] order.
pub fn ghz_basis_on(first: QubitLabel, second: QubitLabel, third: QubitLabel) -> Vec<StateVector> {
    GhzKind::ALL
        .into_iter()
        .map(|k| make_ghz_on(k, first, second, third))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng() -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(7)
    }

    const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn bell_amplitudes_match_definitions() {
        let psi_minus = make_bell(BellKind::PsiMinus);
        let amps = psi_minus.amplitudes();
        assert!((amps[0].norm()) < 1e-15);
        assert!((amps[1].re - INV_SQRT2).abs() < 1e-15);
        assert!((amps[2].re + INV_SQRT2).abs() < 1e-15);
        assert!((amps[3].norm()) < 1e-15);

        let phi_plus = make_bell(BellKind::PhiPlus);
        assert!((phi_plus.amplitude(0).re - INV_SQRT2).abs() < 1e-15);
        assert!((phi_plus.amplitude(3).re - INV_SQRT2).abs() < 1e-15);

        for kind in BellKind::ALL {
            assert!((make_bell(kind).norm() - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn ghz_amplitudes_match_definitions() {
        let s_minus = make_ghz(GhzKind::SMinus);
        assert!((s_minus.amplitude(0b011).re - INV_SQRT2).abs() < 1e-15);
        assert!((s_minus.amplitude(0b100).re + INV_SQRT2).abs() < 1e-15);
        assert_eq!(s_minus.support(1e-9).len(), 2);

        let q_minus = make_ghz(GhzKind::QMinus);
        assert!((q_minus.amplitude(0b001).re - INV_SQRT2).abs() < 1e-15);
        assert!((q_minus.amplitude(0b110).re + INV_SQRT2).abs() < 1e-15);

        for kind in GhzKind::ALL {
            assert!((make_ghz(kind).norm() - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn pauli_gates_match_definitions() {
        let u1 = pauli_gate(Code2::new(0b01));
        let g = StateVector::basis_qubit(q(Role::A, 1), false);
        let flipped = g.apply(&u1, &[q(Role::A, 1)]).unwrap();
        assert!((flipped.amplitude(1).re - 1.0).abs() < 1e-15);

        let u2 = pauli_gate(Code2::new(0b10));
        let viag = g.apply(&u2, &[q(Role::A, 1)]).unwrap();
        assert!((viag.amplitude(1).re + 1.0).abs() < 1e-15, "U2|g> = -|e>");
        let e = StateVector::basis_qubit(q(Role::A, 1), true);
        let viae = e.apply(&u2, &[q(Role::A, 1)]).unwrap();
        assert!((viae.amplitude(0).re - 1.0).abs() < 1e-15, "U2|e> = |g>");

        let u0 = pauli_gate(Code2::new(0b00));
        let same = g.apply(&u0, &[q(Role::A, 1)]).unwrap();
        assert_eq!(same.max_abs_diff(&g).unwrap(), 0.0);

        for code in Code2::ALL {
            assert!(pauli_gate(code).unitarity_residual() <= NORM_TOL);
        }
        assert!(hadamard().unitarity_residual() <= NORM_TOL);
    }

    #[test]
    fn tensor_forms_outer_product() {
        let g = StateVector::basis_qubit(q(Role::A, 1), false);
        let e = StateVector::basis_qubit(q(Role::B, 1), true);
        let ge = g.tensor(&e).unwrap();
        assert!((ge.amplitude(0b01).re - 1.0).abs() < 1e-15);
        assert!((ge.norm() - 1.0).abs() < NORM_TOL);

        let dup = g.tensor(&g);
        assert_eq!(dup.unwrap_err(), StateError::DuplicateQubit(q(Role::A, 1)));
    }

    // Expanding (|gee> - |egg>)/sqrt2 x (|ge> - |eg>)/sqrt2 by hand gives four
    // kets with coefficients +1/2, -1/2, -1/2, +1/2 at ABCDE indices
    // 01101, 01110, 10001, 10010.
    #[test]
    fn tensor_of_ghz_and_bell_matches_hand_expansion() {
        let joint = make_ghz(GhzKind::SMinus)
            .tensor(&make_bell(BellKind::PsiMinus))
            .unwrap();
        let support = joint.support(1e-12);
        assert_eq!(support, vec![0b01101, 0b01110, 0b10001, 0b10010]);
        assert!((joint.amplitude(0b01101).re - 0.5).abs() < 1e-14);
        assert!((joint.amplitude(0b01110).re + 0.5).abs() < 1e-14);
        assert!((joint.amplitude(0b10001).re + 0.5).abs() < 1e-14);
        assert!((joint.amplitude(0b10010).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn hadamard_maps_g_to_plus_and_squares_to_identity() {
        let target = q(Role::C, 1);
        let g = StateVector::basis_qubit(target, false);
        let plus = g.apply(&hadamard(), &[target]).unwrap();
        let expect = StateVector::x_basis_qubit(target, false);
        assert!(plus.max_abs_diff(&expect).unwrap() < 1e-15);

        let back = plus.apply(&hadamard(), &[target]).unwrap();
        assert!(back.max_abs_diff(&g).unwrap() < NORM_TOL);
    }

    #[test]
    fn measure_deterministic_on_eigenstates() {
        let mut r = rng();
        let g = StateVector::basis_qubit(q(Role::D, 1), false);
        for _ in 0..16 {
            let (outcome, post) = g.measure(q(Role::D, 1), MeasBasis::Z, &mut r).unwrap();
            assert!(!outcome);
            assert_eq!(post.qubit_count(), 0);
        }
        let plus = StateVector::x_basis_qubit(q(Role::D, 1), false);
        for _ in 0..16 {
            let (outcome, _) = plus.measure(q(Role::D, 1), MeasBasis::X, &mut r).unwrap();
            assert!(!outcome);
        }
    }

    #[test]
    fn singlet_measurement_is_anticorrelated_in_both_bases() {
        let mut r = rng();
        let mut saw_g = false;
        let mut saw_e = false;
        for basis in [MeasBasis::Z, MeasBasis::X] {
            for _ in 0..64 {
                let singlet = make_bell(BellKind::PsiMinus);
                let (first, rest) = singlet.measure(q(Role::D, 1), basis, &mut r).unwrap();
                let (second, _) = rest.measure(q(Role::E, 1), basis, &mut r).unwrap();
                assert_ne!(first, second, "same-basis outcomes must be opposite");
                if basis == MeasBasis::Z {
                    saw_g |= !first;
                    saw_e |= first;
                }
            }
        }
        assert!(saw_g && saw_e, "both branches occur with probability 1/2");
    }

    #[test]
    fn ghz_basis_measurement_projects_eigenstates() {
        let mut r = rng();
        let labels = (q(Role::A, 1), q(Role::B, 1), q(Role::C, 1));
        let basis = ghz_basis_on(labels.0, labels.1, labels.2);
        let (idx, post) = make_ghz(GhzKind::SPlus)
            .measure_in_state_basis(&[labels.0, labels.1, labels.2], &basis, &mut r)
            .unwrap();
        assert_eq!(GhzKind::ALL[idx], GhzKind::SPlus);
        assert_eq!(post.qubit_count(), 0);

        let bell = bell_basis_on(q(Role::D, 1), q(Role::E, 1));
        let (idx, _) = make_bell(BellKind::PhiMinus)
            .measure_in_state_basis(&[q(Role::D, 1), q(Role::E, 1)], &bell, &mut r)
            .unwrap();
        assert_eq!(BellKind::ALL[idx], BellKind::PhiMinus);
    }

    #[test]
    fn state_basis_measurement_rejects_bad_bases() {
        let mut r = rng();
        let d = q(Role::D, 1);
        let e = q(Role::E, 1);
        let bad = vec![
            make_bell_on(BellKind::PhiPlus, d, e),
            make_bell_on(BellKind::PhiPlus, d, e),
            make_bell_on(BellKind::PsiPlus, d, e),
            make_bell_on(BellKind::PsiMinus, d, e),
        ];
        let err = make_bell(BellKind::PhiMinus)
            .measure_in_state_basis(&[d, e], &bad, &mut r)
            .unwrap_err();
        assert!(matches!(err, StateError::BadBasis(_)));
    }

    // U2 on the first atom sends S- to P+ with an overall sign of -1.
    #[test]
    fn u2_transforms_s_minus_into_p_plus() {
        let transformed = make_ghz(GhzKind::SMinus)
            .apply(&pauli_gate(Code2::new(0b10)), &[q(Role::A, 1)])
            .unwrap();
        let p_plus = make_ghz(GhzKind::PPlus);
        assert!(transformed
            .equal_up_to_global_phase(&p_plus, STATE_TOL)
            .unwrap());
        // Phase is exactly -1.
        assert!((transformed.amplitude(0b111) + p_plus.amplitude(0b111)).norm() < 1e-14);

        let mut r = rng();
        let basis = ghz_basis_on(q(Role::A, 1), q(Role::B, 1), q(Role::C, 1));
        let (idx, _) = transformed
            .measure_in_state_basis(
                &[q(Role::A, 1), q(Role::B, 1), q(Role::C, 1)],
                &basis,
                &mut r,
            )
            .unwrap();
        assert_eq!(GhzKind::ALL[idx], GhzKind::PPlus);
    }

    #[test]
    fn kind_codes_generate_kinds_from_references() {
        for kind in BellKind::ALL {
            let generated = make_bell(BellKind::PsiMinus)
                .apply(&pauli_gate(kind.code()), &[q(Role::D, 1)])
                .unwrap();
            assert!(
                generated
                    .equal_up_to_global_phase(&make_bell(kind), STATE_TOL)
                    .unwrap(),
                "code {} must map psi- to {kind}",
                kind.code()
            );
        }
        for kind in GhzKind::ALL {
            let reference = kind.family().reference();
            let generated = make_ghz(reference)
                .apply(&pauli_gate(kind.code()), &[q(Role::A, 1)])
                .unwrap();
            assert!(
                generated
                    .equal_up_to_global_phase(&make_ghz(kind), STATE_TOL)
                    .unwrap(),
                "code {} must map {reference} to {kind}",
                kind.code()
            );
        }
    }

    #[test]
    fn global_phase_comparison() {
        let g = StateVector::basis_qubit(q(Role::A, 1), false);
        let minus_g = StateVector::new(
            vec![q(Role::A, 1)],
            vec![Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        assert!(g.equal_up_to_global_phase(&minus_g, 1e-12).unwrap());

        let e = StateVector::basis_qubit(q(Role::A, 1), true);
        assert!(!g.equal_up_to_global_phase(&e, 1e-12).unwrap());

        let other_label = StateVector::basis_qubit(q(Role::B, 1), false);
        assert!(matches!(
            g.equal_up_to_global_phase(&other_label, 1e-12),
            Err(StateError::UnknownQubit(_))
        ));
    }

    #[test]
    fn reorder_permutes_amplitudes() {
        let ge = StateVector::basis_qubit(q(Role::A, 1), false)
            .tensor(&StateVector::basis_qubit(q(Role::B, 1), true))
            .unwrap();
        let swapped = ge.reordered(&[q(Role::B, 1), q(Role::A, 1)]).unwrap();
        assert!((swapped.amplitude(0b10).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_rejects_unknown_labels_and_bad_shapes() {
        let g = StateVector::basis_qubit(q(Role::A, 1), false);
        assert!(matches!(
            g.apply(&hadamard(), &[q(Role::B, 1)]),
            Err(StateError::UnknownQubit(_))
        ));
        assert!(matches!(
            g.apply(&Unitary::identity(4), &[q(Role::A, 1)]),
            Err(StateError::ShapeError(_))
        ));
    }

    #[test]
    fn unitary_constructor_rejects_non_unitary_entries() {
        let bad = Unitary::new(
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(bad, Err(StateError::NotUnitary(_))));
    }
}
