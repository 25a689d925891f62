//! K-preserving isometries between the model lattices.
//!
//! Numbers such as `chi`, `p_a` and intersection products only depend on the
//! lattice and on `K`, so two classes related by such an isometry carry the
//! same elimination numerics. The maps here are the classical ones:
//!
//! - `F_e -> F_{e-2k}`: `B -> B' + kF'`, `F -> F'`.
//! - `F_1 -> P^2` blown up once more: `B -> L`, `F -> L - E_0`.
//! - `F_0 -> P^2` blown up once more: `B -> L - E_a`, `F -> L - E_b`, one
//!   chosen `E_c -> L - E_a - E_b`.
//! - the quadratic transformation centred at three exceptional classes, and
//!   permutations of exceptional classes.
//!
//! Every map is recorded as a `Move`, so a chain can be replayed on other
//! classes and inverted.

use crate::picard::{self, DivisorClass, PicardError, Result, SurfaceModel};

const CREMONA_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    /// `F_e -> F_{e - 2k}`.
    Shear { k: i64 },
    /// `F_1(n) -> P2(n+1)`, the new exceptional class placed first.
    F1ToPlane,
    /// `F_0(n) -> P2(n+1)`; basis of the image is `L, E_a, E_b`, then the
    /// remaining exceptional classes in order. `chosen` is 0-based.
    F0ToPlane { chosen: usize },
    /// New exceptional slot `t` holds old slot `perm[t]` (0-based).
    Permute(Vec<usize>),
    /// Quadratic transformation centred at three exceptional slots (0-based).
    Quadratic(usize, usize, usize),
}

fn expect_model(d: &DivisorClass, ok: bool, what: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(PicardError::Domain { what, model: d.model() })
    }
}

impl Move {
    pub fn apply(&self, d: &DivisorClass) -> Result<DivisorClass> {
        let m = d.model();
        let c = d.coeffs();
        match self {
            Move::Shear { k } => {
                let e = m.e().unwrap_or(0) as i64;
                expect_model(d, !m.is_plane() && e >= 2 * k, "shear")?;
                let mut out = c.to_vec();
                out[1] = picard::add(c[1], picard::mul(c[0], *k)?)?;
                DivisorClass::new(SurfaceModel::ruled((e - 2 * k) as u32, m.n()), out)
            }
            Move::F1ToPlane => {
                expect_model(d, m.e() == Some(1), "F1")?;
                let mut out = vec![picard::add(c[0], c[1])?, -c[1]];
                out.extend_from_slice(&c[2..]);
                DivisorClass::new(SurfaceModel::plane(m.n() + 1), out)
            }
            Move::F0ToPlane { chosen } => {
                expect_model(d, m.e() == Some(0) && *chosen < m.n(), "F0")?;
                let (p, q, cc) = (c[0], c[1], c[2 + chosen]);
                let mut out = vec![
                    picard::add(picard::add(p, q)?, cc)?,
                    picard::sub(-p, cc)?,
                    picard::sub(-q, cc)?,
                ];
                for (i, v) in c[2..].iter().enumerate() {
                    if i != *chosen {
                        out.push(*v);
                    }
                }
                DivisorClass::new(SurfaceModel::plane(m.n() + 1), out)
            }
            Move::Permute(perm) => {
                let h = m.head_len();
                expect_model(d, perm.len() == m.n(), "permute")?;
                let mut out = c[..h].to_vec();
                out.extend(perm.iter().map(|&p| c[h + p]));
                DivisorClass::new(m, out)
            }
            Move::Quadratic(i, j, k) => {
                expect_model(d, m.is_plane() && *i.max(j.max(k)) < m.n(), "quadratic")?;
                Ok(quadratic(d, *i, *j, *k)?)
            }
        }
    }

    pub fn apply_inverse(&self, d: &DivisorClass) -> Result<DivisorClass> {
        let m = d.model();
        let c = d.coeffs();
        match self {
            Move::Shear { k } => {
                expect_model(d, !m.is_plane(), "shear")?;
                let e = m.e().unwrap() as i64 + 2 * k;
                let mut out = c.to_vec();
                out[1] = picard::sub(c[1], picard::mul(c[0], *k)?)?;
                DivisorClass::new(SurfaceModel::ruled(e as u32, m.n()), out)
            }
            Move::F1ToPlane => {
                expect_model(d, m.is_plane() && m.n() >= 1, "F1")?;
                let q = -c[1];
                let mut out = vec![picard::sub(c[0], q)?, q];
                out.extend_from_slice(&c[2..]);
                DivisorClass::new(SurfaceModel::ruled(1, m.n() - 1), out)
            }
            Move::F0ToPlane { chosen } => {
                expect_model(d, m.is_plane() && m.n() >= 2 && *chosen < m.n() - 1, "F0")?;
                let (x, y, z) = (c[0], c[1], c[2]);
                let cc = -picard::add(picard::add(x, y)?, z)?;
                let p = picard::add(x, z)?;
                let q = picard::add(x, y)?;
                let mut rest: Vec<i64> = c[3..].to_vec();
                rest.insert(*chosen, cc);
                let mut out = vec![p, q];
                out.extend(rest);
                DivisorClass::new(SurfaceModel::ruled(0, m.n() - 1), out)
            }
            Move::Permute(perm) => {
                let h = m.head_len();
                expect_model(d, perm.len() == m.n(), "permute")?;
                let mut out = c.to_vec();
                for (t, &p) in perm.iter().enumerate() {
                    out[h + p] = c[h + t];
                }
                DivisorClass::new(m, out)
            }
            // an involution
            Move::Quadratic(..) => self.apply(d),
        }
    }
}

fn quadratic(d: &DivisorClass, i: usize, j: usize, k: usize) -> Result<DivisorClass> {
    let c = d.coeffs();
    let (ci, cj, ck) = (c[1 + i], c[1 + j], c[1 + k]);
    let mut out = c.to_vec();
    out[0] = picard::add(picard::mul(2, c[0])?, picard::add(ci, picard::add(cj, ck)?)?)?;
    out[1 + i] = -picard::add(c[0], picard::add(cj, ck)?)?;
    out[1 + j] = -picard::add(c[0], picard::add(ci, ck)?)?;
    out[1 + k] = -picard::add(c[0], picard::add(ci, cj)?)?;
    DivisorClass::new(d.model(), out)
}

/// A chain of moves starting on `source`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    pub source: SurfaceModel,
    pub moves: Vec<Move>,
}

impl Isometry {
    pub fn identity(source: SurfaceModel) -> Self {
        Isometry {
            source,
            moves: Vec::new(),
        }
    }

    pub fn apply(&self, d: &DivisorClass) -> Result<DivisorClass> {
        if d.model() != self.source {
            return Err(PicardError::ModelMismatch(d.model(), self.source));
        }
        self.moves.iter().try_fold(d.clone(), |acc, mv| mv.apply(&acc))
    }

    pub fn apply_inverse(&self, d: &DivisorClass) -> Result<DivisorClass> {
        let out = self
            .moves
            .iter()
            .rev()
            .try_fold(d.clone(), |acc, mv| mv.apply_inverse(&acc))?;
        if out.model() != self.source {
            return Err(PicardError::ModelMismatch(out.model(), self.source));
        }
        Ok(out)
    }
}

/// Index of the exceptional class with the largest multiplicity, first on ties.
pub fn heaviest_exceptional(d: &DivisorClass) -> Option<usize> {
    let ex = d.exceptional_coeffs();
    (0..ex.len()).min_by_key(|&i| (ex[i], i))
}

/// Moves taking `d`'s model to a blown-up plane, choosing the `F_0` centre by
/// `heaviest_exceptional`. `None` for `F_0` or `F_2k` with no blown-up point.
pub fn to_plane(d: &DivisorClass) -> Option<Isometry> {
    let model = d.model();
    let mut iso = Isometry::identity(model);
    let Some(e) = model.e() else {
        return Some(iso);
    };
    let k = (e / 2) as i64;
    if k > 0 {
        iso.moves.push(Move::Shear { k });
    }
    if e % 2 == 1 {
        iso.moves.push(Move::F1ToPlane);
    } else {
        let chosen = heaviest_exceptional(d)?;
        iso.moves.push(Move::F0ToPlane { chosen });
    }
    Some(iso)
}

fn sort_moves(d: &DivisorClass) -> Option<Move> {
    let ex = d.exceptional_coeffs();
    let mut perm: Vec<usize> = (0..ex.len()).collect();
    // Multiplicities non-increasing, i.e. raw coefficients non-decreasing.
    perm.sort_by_key(|&i| (ex[i], i));
    if perm.iter().enumerate().all(|(t, &p)| t == p) {
        None
    } else {
        Some(Move::Permute(perm))
    }
}

/// Reduces a plane class by quadratic transformations until
/// `d >= m_1 + m_2 + m_3` (or `d <= 0`), keeping multiplicities sorted.
/// Returns the chain and the reduced class.
pub fn cremona_reduce(d: &DivisorClass) -> Result<Option<(Isometry, DivisorClass)>> {
    if !d.model().is_plane() {
        return Ok(None);
    }
    let mut iso = Isometry::identity(d.model());
    let mut cur = d.clone();
    for _ in 0..CREMONA_CAP {
        if let Some(mv) = sort_moves(&cur) {
            cur = mv.apply(&cur)?;
            iso.moves.push(mv);
        }
        let c = cur.coeffs();
        if c.len() < 4 || c[0] <= 0 {
            return Ok(Some((iso, cur)));
        }
        let top = -(c[1] + c[2] + c[3]);
        if c[0] >= top {
            return Ok(Some((iso, cur)));
        }
        let mv = Move::Quadratic(0, 1, 2);
        cur = mv.apply(&cur)?;
        iso.moves.push(mv);
    }
    Ok(None)
}

/// Normal form used to recognise lattice-equivalent classes: the plane
/// image, Cremona-reduced and sorted. Equal normal forms on equal models
/// witness an isometry; different forms prove nothing.
pub fn normal_form(d: &DivisorClass) -> Result<Option<(Isometry, DivisorClass)>> {
    let Some(mut iso) = to_plane(d) else {
        return Ok(None);
    };
    let plane = iso.apply(d)?;
    let Some((red, out)) = cremona_reduce(&plane)? else {
        return Ok(None);
    };
    iso.moves.extend(red.moves);
    Ok(Some((iso, out)))
}
