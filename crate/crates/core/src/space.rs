//! Self-dual Hilbert spaces: an even-dimensional complex space together with
//! an antiunitary involution Γ acting as v ↦ G·conj(v) for a unitary G.
//!
//! The canonical construction pairs every particle label (x, s, -) with its
//! hole partner (x, s, +), G being the permutation that swaps each pair.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{fro, CMatrix, CVector};

/// Particle/hole tag. `Minus` sorts before `Plus`, which fixes the canonical
/// basis order together with the lexicographic site order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    Minus,
    Plus,
}

impl Tag {
    pub fn flip(self) -> Tag {
        match self {
            Tag::Minus => Tag::Plus,
            Tag::Plus => Tag::Minus,
        }
    }
}

/// Basis label (x, s, v): lattice position, spin index and particle/hole tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteLabel {
    pub pos: Vec<i64>,
    pub spin: u32,
    pub tag: Tag,
}

impl SiteLabel {
    pub fn new(pos: Vec<i64>, spin: u32, tag: Tag) -> Self {
        SiteLabel { pos, spin, tag }
    }

    pub fn partner(&self) -> SiteLabel {
        SiteLabel { pos: self.pos.clone(), spin: self.spin, tag: self.tag.flip() }
    }
}

impl std::fmt::Display for SiteLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.tag {
            Tag::Minus => '-',
            Tag::Plus => '+',
        };
        write!(f, "({:?},{},{})", self.pos, self.spin, tag)
    }
}

/// How distances between labels are measured. Periodic spaces use the torus
/// (minimum-image) distance over the stored extent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Open,
    Periodic { extent: Vec<i64> },
}

/// An even-dimensional complex space with antiunitary involution Γ.
#[derive(Debug, Clone)]
pub struct SelfDualSpace {
    dim: usize,
    gamma: CMatrix,
    labels: Vec<SiteLabel>,
    /// partner[i] = j when Γ maps basis vector i to basis vector j.
    partner: Vec<usize>,
    geometry: Geometry,
}

impl PartialEq for SelfDualSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.labels == other.labels
    }
}

impl SelfDualSpace {
    /// Builds the space over the given labels with Γ = pair swap ∘ conjugation.
    /// Every `(x, s, -)` label must have its `(x, s, +)` partner present.
    pub fn make_space(labels: Vec<SiteLabel>) -> Result<Arc<SelfDualSpace>> {
        Self::make_space_with_geometry(labels, Geometry::Open)
    }

    pub fn make_space_with_geometry(
        labels: Vec<SiteLabel>,
        geometry: Geometry,
    ) -> Result<Arc<SelfDualSpace>> {
        if labels.is_empty() {
            return Err(Error::InvalidConfig("label list is empty".into()));
        }
        let dim = labels.len();
        let mut partner = vec![usize::MAX; dim];
        for (i, lab) in labels.iter().enumerate() {
            if partner[i] != usize::MAX {
                continue;
            }
            let want = lab.partner();
            let j = labels
                .iter()
                .position(|other| *other == want)
                .ok_or_else(|| Error::UnpairedLabel(lab.to_string()))?;
            if j == i {
                return Err(Error::UnpairedLabel(lab.to_string()));
            }
            partner[i] = j;
            partner[j] = i;
        }
        let mut gamma = CMatrix::zeros(dim, dim);
        for (i, &j) in partner.iter().enumerate() {
            gamma[(j, i)] = C64::new(1.0, 0.0);
        }
        Ok(Arc::new(SelfDualSpace { dim, gamma, labels, partner, geometry }))
    }

    /// A space of `n_modes` abstract paired modes, used for tests and for
    /// subspaces that carry no lattice structure.
    pub fn synthetic(n_modes: usize) -> Arc<SelfDualSpace> {
        let mut labels = Vec::with_capacity(2 * n_modes);
        for j in 0..n_modes {
            labels.push(SiteLabel::new(vec![j as i64], 0, Tag::Minus));
            labels.push(SiteLabel::new(vec![j as i64], 0, Tag::Plus));
        }
        Self::make_space(labels).expect("synthetic labels are paired")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_modes(&self) -> usize {
        self.dim / 2
    }

    pub fn labels(&self) -> &[SiteLabel] {
        &self.labels
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn gamma_matrix(&self) -> &CMatrix {
        &self.gamma
    }

    pub fn partner_index(&self, i: usize) -> usize {
        self.partner[i]
    }

    /// Γv = G conj(v).
    pub fn gamma_apply(&self, v: &CVector) -> CVector {
        &self.gamma * v.conjugate()
    }

    /// ΓAΓ = G conj(A) conj(G), the antiunitary conjugation of a linear map.
    pub fn gamma_conj(&self, a: &CMatrix) -> CMatrix {
        &self.gamma * a.conjugate() * self.gamma.conjugate()
    }

    /// Indices of the `Minus`-tagged labels, in basis order. These enumerate
    /// the modes of the canonical one-particle space.
    pub fn minus_indices(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.labels[i].tag == Tag::Minus).collect()
    }

    /// The canonical basis projection onto the span of the `Minus` labels.
    pub fn canonical_projection(&self) -> CMatrix {
        let mut p = CMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            if self.labels[i].tag == Tag::Minus {
                p[(i, i)] = C64::new(1.0, 0.0);
            }
        }
        p
    }

    pub fn index_of(&self, label: &SiteLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Distance between the lattice positions of two basis labels, as the
    /// Euclidean norm of the integer displacement (minimum image on a torus).
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let a = &self.labels[i].pos;
        let b = &self.labels[j].pos;
        debug_assert_eq!(a.len(), b.len());
        let mut sum = 0.0;
        for k in 0..a.len() {
            let mut d = (a[k] - b[k]).abs();
            if let Geometry::Periodic { extent } = &self.geometry {
                let n = extent[k];
                if n > 0 {
                    d = d.min(n - d);
                }
            }
            sum += (d as f64) * (d as f64);
        }
        sum.sqrt()
    }

    /// Residuals of the defining invariants: G unitary and Γ² = 1.
    pub fn involution_residuals(&self) -> (f64, f64) {
        let id = CMatrix::identity(self.dim, self.dim);
        let unitary = fro(&(self.gamma.adjoint() * &self.gamma - &id));
        let squares = fro(&(&self.gamma * self.gamma.conjugate() - id));
        (unitary, squares)
    }
}

/// Labels for a `d`-dimensional box of radius `l` (sites with |x_i| <= l),
/// `n_spins` spin states per site, in lexicographic (x, s, tag) order.
pub fn box_labels(d: usize, l: i64, n_spins: u32) -> Vec<SiteLabel> {
    let mut labels = Vec::new();
    let mut site = vec![-l; d];
    loop {
        for s in 0..n_spins {
            labels.push(SiteLabel::new(site.clone(), s, Tag::Minus));
            labels.push(SiteLabel::new(site.clone(), s, Tag::Plus));
        }
        // advance the odometer
        let mut k = d;
        loop {
            if k == 0 {
                return labels;
            }
            k -= 1;
            if site[k] < l {
                site[k] += 1;
                for x in site.iter_mut().skip(k + 1) {
                    *x = -l;
                }
                break;
            }
        }
    }
}
