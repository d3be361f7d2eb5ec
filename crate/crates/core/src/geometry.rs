//! Radius profiles of cylindrical surfaces and the metric weights of the
//! warped Laplace-Beltrami operator.
//!
//! A surface of revolution is the graph of a positive radius function
//! `rho(x)` over the axial coordinate `x in [0, L]`. The axial part of the
//! Laplace-Beltrami operator is written in divergence form
//! `(1 / w1) d/dx (w2 d/dx)` with
//!
//! ```text
//! g  = rho^2 (1 + rho'^2)
//! w1 = rho sqrt(1 + rho'^2)      (= sqrt(g))
//! w2 = rho^3 / sqrt(1 + rho'^2)
//! ```

use std::f64::consts::PI;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Number of samples used to check positivity of analytic profiles.
const POSITIVITY_SAMPLES: usize = 4001;

/// The closed form (or table) behind a [`SurfaceProfile`].
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `rho(x) = radius`.
    Constant { radius: f64 },
    /// `rho(x) = base + amp * exp(sin(2 pi lobes x / L))`.
    Pearls { base: f64, amp: f64, lobes: f64 },
    /// `rho(x) = base + slope x / L + amp * exp(-(x - center)^2 / (2 sigma^2))`.
    Swelling {
        base: f64,
        slope: f64,
        amp: f64,
        center: f64,
        sigma: f64,
    },
    /// Uniformly spaced samples `(x_k, rho_k)` with `x_0 = 0`; derivatives
    /// come from second-order finite differences.
    Tabulated {
        spacing: f64,
        rho: Vec<f64>,
        rho1: Vec<f64>,
        rho2: Vec<f64>,
    },
}

/// Radius function of a cylindrical surface on `[0, L]`.
///
/// Profiles are immutable once built and cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceProfile {
    kind: ProfileKind,
    length: f64,
}

/// Radius, its derivatives and the metric weights at one axial position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub g: f64,
    pub w1: f64,
    pub w2: f64,
}

impl MetricSample {
    pub fn from_derivatives(rho: f64, rho1: f64, rho2: f64) -> Self {
        let stretch = (1.0 + rho1 * rho1).sqrt();
        MetricSample {
            rho,
            rho1,
            rho2,
            g: rho * rho * (1.0 + rho1 * rho1),
            w1: rho * stretch,
            w2: rho * rho * rho / stretch,
        }
    }
}

fn check_length(length: f64) -> Result<()> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid("length", format!("must be positive, got {length}")));
    }
    Ok(())
}

impl SurfaceProfile {
    /// Standard cylinder of constant radius.
    pub fn constant(radius: f64, length: f64) -> Result<Self> {
        check_length(length)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(SurfaceProfile {
            kind: ProfileKind::Constant { radius },
            length,
        })
    }

    /// Pearls-on-a-string profile with three lobes.
    pub fn pearls(base: f64, amp: f64, length: f64) -> Result<Self> {
        Self::pearls_with_lobes(base, amp, 3.0, length)
    }

    pub fn pearls_with_lobes(base: f64, amp: f64, lobes: f64, length: f64) -> Result<Self> {
        check_length(length)?;
        if !(base > 0.0) {
            return Err(Error::invalid("base", format!("must be positive, got {base}")));
        }
        if !(amp >= 0.0) {
            return Err(Error::invalid("amp", format!("must be non-negative, got {amp}")));
        }
        if !(lobes > 0.0) {
            return Err(Error::invalid("lobes", format!("must be positive, got {lobes}")));
        }
        let profile = SurfaceProfile {
            kind: ProfileKind::Pearls { base, amp, lobes },
            length,
        };
        profile.check_positive_sampled()?;
        Ok(profile)
    }

    /// Linear slope plus a Gaussian swelling.
    pub fn swelling(
        base: f64,
        slope: f64,
        amp: f64,
        center: f64,
        sigma: f64,
        length: f64,
    ) -> Result<Self> {
        check_length(length)?;
        if !(base > 0.0) {
            return Err(Error::invalid("base", format!("must be positive, got {base}")));
        }
        if !(sigma > 0.0) {
            return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
        }
        let profile = SurfaceProfile {
            kind: ProfileKind::Swelling {
                base,
                slope,
                amp,
                center,
                sigma,
            },
            length,
        };
        profile.check_positive_sampled()?;
        Ok(profile)
    }

    /// Profile from uniformly spaced samples starting at `x = 0`.
    ///
    /// First and second derivatives use centered differences in the
    /// interior and one-sided second-order stencils at the two ends.
    pub fn tabulated(xs: &[f64], rho: &[f64]) -> Result<Self> {
        if xs.len() != rho.len() {
            return Err(Error::shape(xs.len(), rho.len()));
        }
        if xs.len() < 4 {
            return Err(Error::invalid("table", "need at least 4 samples"));
        }
        if xs[0].abs() > 1e-12 {
            return Err(Error::invalid("table", format!("first x must be 0, got {}", xs[0])));
        }
        let n = xs.len();
        let length = xs[n - 1];
        check_length(length)?;
        let h = length / (n - 1) as f64;
        for (k, x) in xs.iter().enumerate() {
            if (x - k as f64 * h).abs() > 1e-9 * length.max(1.0) {
                return Err(Error::invalid("table", format!("samples not uniformly spaced at row {k}")));
            }
        }
        if let Some((k, r)) = rho.iter().enumerate().find(|(_, r)| !(**r > 0.0)) {
            return Err(Error::invalid("rho", format!("non-positive radius {r} at row {k}")));
        }
        let (rho1, rho2) = tabulated_derivatives(rho, h);
        Ok(SurfaceProfile {
            kind: ProfileKind::Tabulated {
                spacing: h,
                rho: rho.to_vec(),
                rho1,
                rho2,
            },
            length,
        })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ProfileKind::Constant { .. } => "constant",
            ProfileKind::Pearls { .. } => "pearls",
            ProfileKind::Swelling { .. } => "swelling",
            ProfileKind::Tabulated { .. } => "tabulated",
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `Some(R)` for a standard cylinder.
    pub fn constant_radius(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Constant { radius } => Some(radius),
            _ => None,
        }
    }

    /// `(rho, rho', rho'')` at `x`, without a domain check.
    pub fn derivatives(&self, x: f64) -> (f64, f64, f64) {
        match &self.kind {
            ProfileKind::Constant { radius } => (*radius, 0.0, 0.0),
            ProfileKind::Pearls { base, amp, lobes } => {
                let k = 2.0 * PI * lobes / self.length;
                let (s, c) = (k * x).sin_cos();
                let e = s.exp();
                (
                    base + amp * e,
                    amp * k * c * e,
                    amp * k * k * e * (c * c - s),
                )
            }
            ProfileKind::Swelling {
                base,
                slope,
                amp,
                center,
                sigma,
            } => {
                let d = x - center;
                let s2 = sigma * sigma;
                let bump = amp * (-d * d / (2.0 * s2)).exp();
                (
                    base + slope * x / self.length + bump,
                    slope / self.length - bump * d / s2,
                    bump * (d * d / (s2 * s2) - 1.0 / s2),
                )
            }
            ProfileKind::Tabulated {
                spacing,
                rho,
                rho1,
                rho2,
            } => {
                let n = rho.len();
                let s = (x / spacing).clamp(0.0, (n - 1) as f64);
                let k = (s.floor() as usize).min(n - 2);
                let t = s - k as f64;
                let lerp = |v: &[f64]| v[k] + t * (v[k + 1] - v[k]);
                (lerp(rho), lerp(rho1), lerp(rho2))
            }
        }
    }

    pub fn radius(&self, x: f64) -> f64 {
        self.derivatives(x).0
    }

    pub fn radius_d1(&self, x: f64) -> f64 {
        self.derivatives(x).1
    }

    pub fn radius_d2(&self, x: f64) -> f64 {
        self.derivatives(x).2
    }

    /// Metric quantities at `x`, which must lie in `[0, L]`.
    pub fn metric(&self, x: f64) -> Result<MetricSample> {
        if !(x >= 0.0 && x <= self.length) {
            return Err(Error::Domain {
                x,
                length: self.length,
            });
        }
        let (r, r1, r2) = self.derivatives(x);
        Ok(MetricSample::from_derivatives(r, r1, r2))
    }

    /// Rejects the profile if `rho <= 0` at any node of `grid`.
    pub fn check_positive_on(&self, grid: &Grid1D) -> Result<()> {
        for x in grid.nodes() {
            let r = self.radius(x);
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid("rho", format!("radius {r} at x = {x} is not positive")));
            }
        }
        Ok(())
    }

    fn check_positive_sampled(&self) -> Result<()> {
        let h = self.length / (POSITIVITY_SAMPLES - 1) as f64;
        for k in 0..POSITIVITY_SAMPLES {
            let x = k as f64 * h;
            let r = self.radius(x);
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid("rho", format!("radius {r} at x = {x} is not positive")));
            }
        }
        Ok(())
    }

    /// Warp size `R^-1 ||rho - R||_{C^2}` with the C^2 norm taken as the
    /// maximum of the sup norms of the value and the first two derivatives,
    /// sampled on the grid nodes.
    pub fn warp_delta(&self, reference_radius: f64, grid: &Grid1D) -> f64 {
        let mut sup = 0.0_f64;
        for x in grid.nodes() {
            let (r, r1, r2) = self.derivatives(x);
            sup = sup
                .max((r - reference_radius).abs())
                .max(r1.abs())
                .max(r2.abs());
        }
        sup / reference_radius
    }

    /// Short stable fingerprint of the profile, for manifests.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{:?}|{}", self.kind, self.length).as_bytes());
        hex::encode(&hasher.finalize()[..8])
    }
}

fn tabulated_derivatives(rho: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = rho.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 1..n - 1 {
        d1[i] = (rho[i + 1] - rho[i - 1]) / (2.0 * h);
        d2[i] = (rho[i + 1] - 2.0 * rho[i] + rho[i - 1]) / (h * h);
    }
    d1[0] = (-3.0 * rho[0] + 4.0 * rho[1] - rho[2]) / (2.0 * h);
    d1[n - 1] = (3.0 * rho[n - 1] - 4.0 * rho[n - 2] + rho[n - 3]) / (2.0 * h);
    d2[0] = (2.0 * rho[0] - 5.0 * rho[1] + 4.0 * rho[2] - rho[3]) / (h * h);
    d2[n - 1] = (2.0 * rho[n - 1] - 5.0 * rho[n - 2] + 4.0 * rho[n - 3] - rho[n - 4]) / (h * h);
    (d1, d2)
}
