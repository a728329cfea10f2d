use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::algebra::{Exponent, Theta};
use crate::{Error, Result};

/// Spin structure on the base directions: whether the `k` (resp. `l`) index
/// runs over `ℤ + ½` instead of `ℤ`. The fibre index `m` is always integral,
/// which is the projectable choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinStructure {
    pub half_k: bool,
    pub half_l: bool,
}

impl SpinStructure {
    pub const INTEGRAL: SpinStructure = SpinStructure {
        half_k: false,
        half_l: false,
    };

    pub fn new(half_k: bool, half_l: bool) -> Self {
        SpinStructure { half_k, half_l }
    }

    pub fn eps1(&self) -> f64 {
        if self.half_k {
            0.5
        } else {
            0.0
        }
    }

    pub fn eps2(&self) -> f64 {
        if self.half_l {
            0.5
        } else {
            0.0
        }
    }

    /// Parses `"0,0"`, `"1/2,0"`, `"0.5,0.5"` and similar.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::Invalid(format!("spin structure `{s}`: expected two offsets")));
        }
        let half = |p: &str| match p {
            "0" | "0.0" => Ok(false),
            "1/2" | "0.5" | ".5" => Ok(true),
            other => Err(Error::Invalid(format!(
                "spin offset `{other}`: expected 0 or 1/2"
            ))),
        };
        Ok(SpinStructure::new(half(parts[0])?, half(parts[1])?))
    }
}

/// One axis of the index box: `count` consecutive lattice values starting at
/// `first`. Integral axes hold `-N..=N`; half-integer axes hold
/// `-N+½..=N-½`, the symmetric box of that lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub count: usize,
    pub first: f64,
}

impl Axis {
    fn new(n: u32, half: bool) -> Self {
        if half {
            Axis {
                count: 2 * n as usize,
                first: -(n as f64) + 0.5,
            }
        } else {
            Axis {
                count: 2 * n as usize + 1,
                first: -(n as f64),
            }
        }
    }

    pub fn value(&self, pos: usize) -> f64 {
        self.first + pos as f64
    }

    /// Largest `|value|` on the axis.
    pub fn vmax(&self) -> f64 {
        -self.first
    }

    pub fn shift(&self, pos: usize, by: i32) -> Option<usize> {
        let p = pos as i64 + by as i64;
        (p >= 0 && (p as usize) < self.count).then_some(p as usize)
    }
}

/// Lattice position inside the window (0-based per axis).
pub type Site = [usize; 3];

/// The finite index box for `e_{k,l,m} ⊗ ℂ²`.
///
/// Basis order is fixed: `m` outermost, then `k`, then `l`, then the spinor
/// component. Fibres (fixed `m`) are therefore contiguous index ranges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedWindow {
    n: u32,
    spin: SpinStructure,
    theta: Theta,
    axes: [Axis; 3],
}

/// Version string of the basis enumeration, written into export headers.
pub const ENUMERATION_ORDER: &str = "m-k-l-spinor/v1";

impl TruncatedWindow {
    pub fn new(n: u32, spin: SpinStructure, theta: Theta) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("window cutoff N must be positive".into()));
        }
        Ok(TruncatedWindow {
            n,
            spin,
            theta,
            axes: [
                Axis::new(n, spin.half_k),
                Axis::new(n, spin.half_l),
                Axis::new(n, false),
            ],
        })
    }

    pub fn cutoff(&self) -> u32 {
        self.n
    }

    pub fn spin(&self) -> SpinStructure {
        self.spin
    }

    pub fn theta(&self) -> Theta {
        self.theta
    }

    pub fn axis(&self, i: usize) -> Axis {
        self.axes[i]
    }

    pub fn sites(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn dim(&self) -> usize {
        2 * self.sites()
    }

    /// Dimension of one fibre `ℋ_k ∩ window`.
    pub fn fibre_dim(&self) -> usize {
        2 * self.axes[0].count * self.axes[1].count
    }

    pub fn index(&self, site: Site, spinor: usize) -> usize {
        ((site[2] * self.axes[0].count + site[0]) * self.axes[1].count + site[1]) * 2 + spinor
    }

    pub fn coords(&self, index: usize) -> (Site, usize) {
        let spinor = index % 2;
        let rest = index / 2;
        let l = rest % self.axes[1].count;
        let rest = rest / self.axes[1].count;
        let k = rest % self.axes[0].count;
        let m = rest / self.axes[0].count;
        ([k, l, m], spinor)
    }

    pub fn values(&self, site: Site) -> [f64; 3] {
        [
            self.axes[0].value(site[0]),
            self.axes[1].value(site[1]),
            self.axes[2].value(site[2]),
        ]
    }

    pub fn shift(&self, site: Site, by: Exponent) -> Option<Site> {
        Some([
            self.axes[0].shift(site[0], by[0])?,
            self.axes[1].shift(site[1], by[1])?,
            self.axes[2].shift(site[2], by[2])?,
        ])
    }

    /// `(k,l,m) ↦ (−k,−l,−m)`; always inside the window because every axis
    /// is symmetric about zero.
    pub fn reflect(&self, site: Site) -> Site {
        [
            self.axes[0].count - 1 - site[0],
            self.axes[1].count - 1 - site[1],
            self.axes[2].count - 1 - site[2],
        ]
    }

    /// True if every shift of size at most `margin` stays inside the window.
    pub fn is_interior(&self, site: Site, margin: u32) -> bool {
        (0..3).all(|i| self.axes[i].value(site[i]).abs() + margin as f64 <= self.axes[i].vmax())
    }

    pub fn fibre_value(&self, site: Site) -> i32 {
        self.axes[2].value(site[2]) as i32
    }

    /// Basis indices of the fibre `m = k`.
    pub fn fibre_range(&self, k: i32) -> Result<Range<usize>> {
        if k.unsigned_abs() > self.n {
            return Err(Error::FibreOutOfRange(k));
        }
        let pos = (k + self.n as i32) as usize;
        let len = self.fibre_dim();
        Ok(pos * len..(pos + 1) * len)
    }

    pub fn fibres(&self) -> impl Iterator<Item = i32> {
        let n = self.n as i32;
        -n..=n
    }

    pub fn interior_indices(&self, margin: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(move |&i| self.is_interior(self.coords(i).0, margin))
    }

    /// Checks that the reflection `k ↦ −k` maps each axis lattice to itself.
    pub fn check_reflection(&self) -> Result<()> {
        for a in &self.axes {
            let lo = a.value(0);
            let hi = a.value(a.count - 1);
            if (lo + hi).abs() > 1e-12 {
                return Err(Error::ReflectionMismatch);
            }
        }
        Ok(())
    }
}
