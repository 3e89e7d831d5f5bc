//! Self-similar and random baselines: four-corner set, general IFS, random
//! four-corner set.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::family::{BoxFamily, FamilyKind, Rect};
use crate::error::{Error, Result};
use crate::kernel::Dyadic;

/// Similarities `T_j(z) = z/L + z_j`, iterated `depth` times on `[0,1]²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsParams {
    ratio: u32,
    translations: Vec<(f64, f64)>,
    depth: usize,
}

impl IfsParams {
    pub fn new(ratio: u32, translations: Vec<(f64, f64)>, depth: usize) -> Result<Self> {
        if ratio < 2 {
            return Err(Error::config(format!(
                "contraction ratio {ratio} must be at least 2"
            )));
        }
        if translations.len() != ratio as usize {
            return Err(Error::config(format!(
                "expected {ratio} translations, got {}",
                translations.len()
            )));
        }
        if translations
            .iter()
            .any(|&(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::config("translations must be finite"));
        }
        for i in 0..translations.len() {
            for j in 0..i {
                if translations[i] == translations[j] {
                    return Err(Error::config(format!("translations {j} and {i} coincide")));
                }
            }
        }
        let (x0, y0) = translations[0];
        let (x1, y1) = translations[1];
        let spread = translations.iter().any(|&(x, y)| {
            let cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0);
            cross.abs() > 1e-12
        });
        if !spread {
            return Err(Error::config("translations are co-linear"));
        }
        Ok(IfsParams {
            ratio,
            translations,
            depth,
        })
    }

    /// The four-corner system: ratio 4, corners of `[0,1]²`.
    pub fn four_corner(depth: usize) -> Self {
        IfsParams::new(
            4,
            vec![(0.0, 0.0), (0.75, 0.0), (0.0, 0.75), (0.75, 0.75)],
            depth,
        )
        .expect("four-corner system is valid")
    }

    pub fn ratio(&self) -> u32 {
        self.ratio
    }

    pub fn translations(&self) -> &[(f64, f64)] {
        &self.translations
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn with_depth(&self, depth: usize) -> Self {
        IfsParams {
            depth,
            ..self.clone()
        }
    }

    /// Side `L^{-depth}` of the level squares.
    pub fn side(&self) -> f64 {
        (self.ratio as f64).powi(-(self.depth as i32))
    }

    /// Lower-left corners of the `L^depth` squares, in digit order.
    pub fn corners(&self) -> Vec<(f64, f64)> {
        let mut corners = vec![(0.0, 0.0)];
        // digit l contributes L^{-(l-1)}·z_{j_l}
        for l in 1..=self.depth {
            let s = (self.ratio as f64).powi(-(l as i32 - 1));
            corners = corners
                .iter()
                .flat_map(|&(x, y)| {
                    self.translations
                        .iter()
                        .map(move |&(zx, zy)| (x + s * zx, y + s * zy))
                })
                .collect();
        }
        corners
    }
}

fn budget(count: u128, max: u128, stage: &'static str) -> Result<()> {
    if count > max {
        return Err(Error::Budget {
            stage,
            required: count,
            budget: max,
        });
    }
    Ok(())
}

fn power(base: u32, exp: usize) -> u128 {
    (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

/// `L^n` squares of side `L^{-n}`. Coordinates that are not dyadic (for
/// ratios other than powers of two) are held as the nearest binary64.
pub fn build_ifs(params: &IfsParams, max_boxes: u128) -> Result<BoxFamily> {
    build_ifs_kind(params, max_boxes, FamilyKind::Ifs)
}

fn build_ifs_kind(params: &IfsParams, max_boxes: u128, kind: FamilyKind) -> Result<BoxFamily> {
    budget(power(params.ratio, params.depth), max_boxes, "ifs family")?;
    let side = Dyadic::from_f64(params.side())?;
    let boxes = params
        .corners()
        .into_iter()
        .map(|(x, y)| {
            let x = Dyadic::from_f64(x)?;
            let y = Dyadic::from_f64(y)?;
            Ok(Rect {
                x_lo: x,
                x_hi: x.checked_add(side)?,
                y_lo: y,
                y_hi: y.checked_add(side)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoxFamily::from_parts(
        params.depth,
        kind,
        boxes,
        None,
        Some(params.clone()),
        None,
    ))
}

/// Level `n` of the four-corner set: `4^n` squares of side `4^{-n}`.
pub fn build_four_corner(n: usize, max_boxes: u128) -> Result<BoxFamily> {
    build_ifs_kind(
        &IfsParams::four_corner(n),
        max_boxes,
        FamilyKind::FourCorner,
    )
}

/// Random four-corner set: every square is cut 4×4 and four of the sixteen
/// children, drawn uniformly without replacement, survive.
pub fn build_random_four_corner(n: usize, seed: u64, max_boxes: u128) -> Result<BoxFamily> {
    budget(power(4, n), max_boxes, "random four-corner family")?;
    if 2 * n > crate::kernel::dyadic::DEFAULT_EXPONENT_LIMIT as usize {
        return Err(Error::invalid(format!("depth {n} too large")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<(u128, u128)> = vec![(0, 0)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(cells.len() * 4);
        for &(ix, iy) in &cells {
            let mut picks = sample(&mut rng, 16, 4).into_vec();
            picks.sort_unstable();
            for c in picks {
                next.push((4 * ix + (c % 4) as u128, 4 * iy + (c / 4) as u128));
            }
        }
        cells = next;
    }
    let e = 2 * n as u32;
    let boxes = cells
        .into_iter()
        .map(|(ix, iy)| {
            Ok(Rect {
                x_lo: Dyadic::new(ix as i128, e)?,
                x_hi: Dyadic::new(ix as i128 + 1, e)?,
                y_lo: Dyadic::new(iy as i128, e)?,
                y_hi: Dyadic::new(iy as i128 + 1, e)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoxFamily::from_parts(
        n,
        FamilyKind::RandomFourCorner,
        boxes,
        None,
        None,
        Some(seed),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn dy(v: f64) -> Dyadic {
        Dyadic::from_f64(v).unwrap()
    }

    #[test]
    fn four_corner_levels() {
        let f1 = build_four_corner(1, 1 << 20).unwrap();
        let got: HashSet<_> = f1.boxes().iter().map(|b| (b.x_lo, b.y_lo)).collect();
        let want: HashSet<_> = [(0.0, 0.0), (0.75, 0.0), (0.0, 0.75), (0.75, 0.75)]
            .iter()
            .map(|&(x, y)| (dy(x), dy(y)))
            .collect();
        assert_eq!(got, want);
        assert!(f1
            .boxes()
            .iter()
            .all(|b| b.x_hi.checked_sub(b.x_lo).unwrap() == dy(0.25)));
        let f2 = build_four_corner(2, 1 << 20).unwrap();
        assert_eq!(f2.len(), 16);
        assert!(f2
            .boxes()
            .iter()
            .all(|b| b.y_hi.checked_sub(b.y_lo).unwrap() == dy(1.0 / 16.0)));
        assert!(f2.is_nested_in(&f1));
        assert!(build_four_corner(6, 100).is_err());
    }

    #[test]
    fn ifs_matches_four_corner() {
        let p = IfsParams::new(
            4,
            vec![(0.0, 0.0), (0.75, 0.0), (0.0, 0.75), (0.75, 0.75)],
            2,
        )
        .unwrap();
        let a: HashSet<_> = build_ifs(&p, 1 << 20)
            .unwrap()
            .boxes()
            .iter()
            .copied()
            .collect();
        let b: HashSet<_> = build_four_corner(2, 1 << 20)
            .unwrap()
            .boxes()
            .iter()
            .copied()
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn ternary_ifs() {
        let p = IfsParams::new(3, vec![(0.0, 0.0), (2.0 / 3.0, 0.0), (0.0, 2.0 / 3.0)], 1).unwrap();
        let f = build_ifs(&p, 1 << 20).unwrap();
        assert_eq!(f.len(), 3);
        for b in f.boxes() {
            let w = b.x_hi.checked_sub(b.x_lo).unwrap().to_f64();
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ifs_rejects_bad_translations() {
        assert!(IfsParams::new(3, vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)], 1).is_err());
        assert!(IfsParams::new(3, vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)], 1).is_err());
        assert!(IfsParams::new(3, vec![(0.0, 0.0), (1.0, 0.0)], 1).is_err());
        assert!(IfsParams::new(1, vec![(0.0, 0.0)], 1).is_err());
    }

    #[test]
    fn random_four_corner_is_deterministic() {
        let f0 = build_random_four_corner(0, 7, 1 << 20).unwrap();
        assert_eq!(
            f0.boxes(),
            &[Rect {
                x_lo: Dyadic::ZERO,
                x_hi: Dyadic::ONE,
                y_lo: Dyadic::ZERO,
                y_hi: Dyadic::ONE,
            }]
        );
        for n in 1..5 {
            let a = build_random_four_corner(n, 42, 1 << 20).unwrap();
            let b = build_random_four_corner(n, 42, 1 << 20).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 4usize.pow(n as u32));
            let distinct: HashSet<_> = a.boxes().iter().collect();
            assert_eq!(distinct.len(), a.len());
            let parent = build_random_four_corner(n - 1, 42, 1 << 20).unwrap();
            assert!(a.is_nested_in(&parent));
        }
        assert_ne!(
            build_random_four_corner(3, 1, 1 << 20).unwrap(),
            build_random_four_corner(3, 2, 1 << 20).unwrap()
        );
    }
}
