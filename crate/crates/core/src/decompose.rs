//! Decomposition of bi-exciton eigenstates into products of single-exciton
//! states living on two disjoint parts of the chain.
//!
//! Each part is diagonalized in isolation, ignoring couplings across the
//! partition. A bi-exciton is then compared against
//!
//! * every product `phi_A^k (x) phi_B^l` with one excitation on each part, and
//! * every state with both excitations on one part: the eigenstates of the
//!   two-excitation problem restricted to that part. On a part of three atoms
//!   these are single holes in an otherwise excited sub-chain ("inverted"
//!   excitons); on a part of two atoms it is the doubly excited pair `|pp>`.

use std::fmt;
use std::io::Write;

use nalgebra::DVector;

use crate::basis::ExcitationBasis;
use crate::error::{invalid, Result};
use crate::hamiltonian::{ExcitonModel, Interaction};
use crate::spectra::{diagonalize, ExcitonSpectrum};

/// Default fidelity required for a product verdict.
pub const PRODUCT_THRESHOLD: f64 = 0.99;

/// Two disjoint sets of atoms covering the chain (0-based, sorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Partition {
    pub fn new(mut a: Vec<usize>, mut b: Vec<usize>, n_atoms: usize) -> Result<Self> {
        a.sort_unstable();
        b.sort_unstable();
        let mut seen = vec![false; n_atoms];
        for &atom in a.iter().chain(&b) {
            if atom >= n_atoms {
                return Err(invalid(format!(
                    "atom {} outside a chain of {n_atoms}",
                    atom + 1
                )));
            }
            if seen[atom] {
                return Err(invalid(format!("atom {} appears twice in partition", atom + 1)));
            }
            seen[atom] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("atom {} missing from partition", missing + 1)));
        }
        if a.is_empty() || b.is_empty() {
            return Err(invalid("both sides of a partition must be non-empty"));
        }
        Ok(Self { a, b })
    }

    /// First `split` atoms against the rest.
    pub fn split_at(split: usize, n_atoms: usize) -> Result<Self> {
        Self::new((0..split).collect(), (split..n_atoms).collect(), n_atoms)
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn side(&self, side: Side) -> &[usize] {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Product `phi_A (x) phi_B` expressed in the two-excitation basis.
///
/// `phi_a[i]` is the amplitude on atom `partition.a()[i]`, likewise for `b`.
/// The result is normalized.
pub fn tensor_embed(
    phi_a: &[f64],
    phi_b: &[f64],
    partition: &Partition,
    basis: &ExcitationBasis,
) -> Result<DVector<f64>> {
    if basis.q() != 2 {
        return Err(invalid("tensor_embed needs a two-excitation basis"));
    }
    if phi_a.len() != partition.a.len() || phi_b.len() != partition.b.len() {
        return Err(invalid("single-exciton vectors do not match the partition"));
    }
    let mut out = DVector::zeros(basis.len());
    for (&n, &ca) in partition.a.iter().zip(phi_a) {
        for (&m, &cb) in partition.b.iter().zip(phi_b) {
            let idx = basis
                .index_of(&[n, m])
                .ok_or_else(|| invalid("partition does not fit the basis"))?;
            out[idx] = ca * cb;
        }
    }
    let norm = out.norm();
    if norm == 0.0 {
        return Err(invalid("product state has zero norm"));
    }
    Ok(out / norm)
}

/// Verdict for one bi-exciton state. Sub-chain state indices are 0-based and
/// in ascending energy order of the isolated sub-problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Product {
        k_a: usize,
        k_b: usize,
        fidelity: f64,
    },
    /// Both excitations on one side. `filled` marks a side with exactly two
    /// atoms, where the only candidate is `|pp>`.
    Inverted {
        side: Side,
        k: usize,
        filled: bool,
        fidelity: f64,
    },
    Entangled {
        best: f64,
    },
}

impl Verdict {
    pub fn fidelity(&self) -> f64 {
        match *self {
            Verdict::Product { fidelity, .. } | Verdict::Inverted { fidelity, .. } => fidelity,
            Verdict::Entangled { best } => best,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Product { .. } => "product",
            Verdict::Inverted { filled: true, .. } => "filled",
            Verdict::Inverted { .. } => "inverted",
            Verdict::Entangled { .. } => "entangled",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Verdict::Product { k_a, k_b, fidelity } => write!(
                f,
                "phi_A[{}] x phi_B[{}] (F = {fidelity:.4})",
                k_a + 1,
                k_b + 1
            ),
            Verdict::Inverted {
                side,
                k,
                filled,
                fidelity,
            } => {
                let name = if filled { "filled" } else { "inverted" };
                write!(f, "{name} {side:?}[{}] (F = {fidelity:.4})", k + 1)
            }
            Verdict::Entangled { best } => write!(f, "entangled (best F = {best:.4})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductDecomposition {
    pub partition: Partition,
    pub threshold: f64,
    pub verdicts: Vec<Verdict>,
}

impl ProductDecomposition {
    pub fn count(&self, kind: &str) -> usize {
        self.verdicts.iter().filter(|v| v.kind() == kind).count()
    }
}

/// Eigenstates of `q` excitations confined to `atoms`, with couplings to the
/// rest of the chain dropped.
fn sub_spectrum(
    atoms: &[usize],
    q: usize,
    geometry: &[f64],
    interaction: Interaction,
) -> Result<ExcitonSpectrum> {
    let local = ExcitationBasis::with_full(atoms.len(), q)?;
    let positions: Vec<f64> = atoms.iter().map(|&a| geometry[a]).collect();
    let h = ExcitonModel::new(local, interaction).hamiltonian(&positions)?;
    diagonalize(&h)
}

fn embed_pair_state(
    local: &[f64],
    atoms: &[usize],
    basis: &ExcitationBasis,
) -> DVector<f64> {
    let local_basis =
        ExcitationBasis::with_full(atoms.len(), 2).expect("side holds at least two atoms");
    let mut out = DVector::zeros(basis.len());
    for (i, pair) in local_basis.states().iter().enumerate() {
        let global = basis
            .index_of(&[atoms[pair[0]], atoms[pair[1]]])
            .expect("pair inside the chain");
        out[global] = local[i];
    }
    out
}

enum Candidate {
    Product(usize, usize),
    Inverted(Side, usize, bool),
}

/// Classifies every bi-exciton in `spectrum` against products over
/// `partition`.
///
/// For an exactly degenerate cluster the fidelity of a candidate is its
/// weight in the whole cluster subspace, and each cluster member claims a
/// different candidate.
pub fn decompose_biexcitons(
    spectrum: &ExcitonSpectrum,
    basis: &ExcitationBasis,
    interaction: Interaction,
    partition: &Partition,
    threshold: f64,
) -> Result<ProductDecomposition> {
    if basis.q() != 2 || spectrum.dim() != basis.len() {
        return Err(invalid("decomposition needs a two-excitation spectrum"));
    }
    let geometry = &spectrum.geometry;
    let single_a = sub_spectrum(&partition.a, 1, geometry, interaction)?;
    let single_b = sub_spectrum(&partition.b, 1, geometry, interaction)?;

    let mut candidates: Vec<(Candidate, DVector<f64>)> = Vec::new();
    for ka in 0..single_a.dim() {
        for kb in 0..single_b.dim() {
            let v = tensor_embed(single_a.vector(ka), single_b.vector(kb), partition, basis)?;
            candidates.push((Candidate::Product(ka, kb), v));
        }
    }
    for side in [Side::A, Side::B] {
        let atoms = partition.side(side);
        if atoms.len() < 2 {
            continue;
        }
        let sub = sub_spectrum(atoms, 2, geometry, interaction)?;
        let filled = atoms.len() == 2;
        for k in 0..sub.dim() {
            let v = embed_pair_state(sub.vector(k), atoms, basis);
            candidates.push((Candidate::Inverted(side, k, filled), v));
        }
    }

    let scale = spectrum
        .energies
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
        .max(f64::MIN_POSITIVE);
    let n = spectrum.dim();
    let mut verdicts = Vec::with_capacity(n);
    let mut used: Vec<(usize, usize)> = Vec::new();
    for k in 0..n {
        let cluster: Vec<usize> = (0..n)
            .filter(|&j| (spectrum.energies[j] - spectrum.energies[k]).abs() <= 1e-9 * scale)
            .collect();
        let leader = cluster[0];
        let mut best: Option<(usize, f64)> = None;
        for (c, (_, v)) in candidates.iter().enumerate() {
            // inside a degenerate cluster a candidate may only be claimed once
            if used.iter().any(|&(l, u)| l == leader && u == c) {
                continue;
            }
            let fidelity: f64 = cluster
                .iter()
                .map(|&j| {
                    let o: f64 = spectrum.vector(j).iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                    o * o
                })
                .sum();
            if best.is_none_or(|(_, f)| fidelity > f) {
                best = Some((c, fidelity));
            }
        }
        let (c, fidelity) = best.expect("at least one candidate");
        if cluster.len() > 1 {
            used.push((leader, c));
        }
        let fidelity = fidelity.min(1.0);
        let verdict = if fidelity < threshold {
            Verdict::Entangled { best: fidelity }
        } else {
            match candidates[c].0 {
                Candidate::Product(k_a, k_b) => Verdict::Product {
                    k_a,
                    k_b,
                    fidelity,
                },
                Candidate::Inverted(side, k, filled) => Verdict::Inverted {
                    side,
                    k,
                    filled,
                    fidelity,
                },
            }
        };
        verdicts.push(verdict);
    }
    Ok(ProductDecomposition {
        partition: partition.clone(),
        threshold,
        verdicts,
    })
}

/// CSV with columns `state,energy,verdict,k_A,k_B,fidelity`; indices are
/// 1-based and empty where they do not apply.
pub fn write_decomposition_csv<W: Write>(
    out: W,
    spectrum: &ExcitonSpectrum,
    decomposition: &ProductDecomposition,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["state", "energy", "verdict", "k_A", "k_B", "fidelity"])?;
    for (k, verdict) in decomposition.verdicts.iter().enumerate() {
        let (ka, kb) = match *verdict {
            Verdict::Product { k_a, k_b, .. } => ((k_a + 1).to_string(), (k_b + 1).to_string()),
            Verdict::Inverted { side: Side::A, k, .. } => ((k + 1).to_string(), String::new()),
            Verdict::Inverted { side: Side::B, k, .. } => (String::new(), (k + 1).to_string()),
            Verdict::Entangled { .. } => (String::new(), String::new()),
        };
        w.write_record([
            (k + 1).to_string(),
            format!("{:.10e}", spectrum.energies[k]),
            verdict.kind().to_string(),
            ka,
            kb,
            format!("{:.10}", verdict.fidelity()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Eigenvector coefficients in tile layout: `state,n,m,value` with the
/// excited atoms `n < m` (1-based). For one excitation `m` is empty.
pub fn write_tiles_csv<W: Write>(
    out: W,
    spectrum: &ExcitonSpectrum,
    basis: &ExcitationBasis,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["state", "n", "m", "value"])?;
    for k in 0..spectrum.dim() {
        for (i, atoms) in basis.states().iter().enumerate() {
            let n = (atoms[0] + 1).to_string();
            let m = atoms.get(1).map(|a| (a + 1).to_string()).unwrap_or_default();
            w.write_record([
                (k + 1).to_string(),
                n,
                m,
                format!("{:.12e}", spectrum.vector(k)[i]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
