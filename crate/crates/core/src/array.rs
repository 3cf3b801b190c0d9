//! Random frequency diverse ULA with a sub-array (hybrid) partition.
//!
//! The array has `N = K * M` elements. Sub-array `k` (1-based) feeds `M`
//! consecutive elements from one RF chain on carrier `f_c + eta_k * df`, with
//! the sub-carrier indices `eta_k` drawn without replacement from
//! `{1, ..., N_f}`. The element at flat index `(k - 1) M + (m - 1)` sees the
//! phase
//!
//! ```text
//! psi(k, m) = 2 pi / c * (-b(k, m) f_c d cos(theta) + eta_k df R),   b(k, m) = (k - 1) M + m - 1
//! ```
//!
//! relative to the reference element, using the absolute range `R` for every
//! element (far-field).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index;

use crate::math::{cos, sin, sqrt};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Receiver location relative to the reference element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPosition {
    angle_rad: f64,
    distance_m: f64,
}

impl PolarPosition {
    pub fn new(angle_rad: f64, distance_m: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&angle_rad) {
            return Err(Error::InvalidConfig(format!(
                "direction angle {angle_rad} rad outside [0, pi]"
            )));
        }
        if !(distance_m >= 0.0) || !distance_m.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "distance {distance_m} m must be finite and non-negative"
            )));
        }
        Ok(Self {
            angle_rad,
            distance_m,
        })
    }

    pub fn from_degrees(angle_deg: f64, distance_m: f64) -> Result<Self> {
        Self::new(angle_deg.to_radians(), distance_m)
    }

    pub fn angle_rad(&self) -> f64 {
        self.angle_rad
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle_rad.to_degrees()
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }
}

/// Geometry and carrier plan, before the random sub-carrier draw.
///
/// `Default` is the reference deployment: `f_c = 3 GHz`, `B = 20 MHz` split
/// into `N_f = 1024` sub-carriers, `K = 32` sub-arrays of `M = 4`
/// half-wavelength spaced elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayParams {
    pub n_antennas: usize,
    pub n_subarrays: usize,
    pub subarray_size: usize,
    pub carrier_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub n_subcarriers: usize,
    /// `None` selects half a carrier wavelength.
    pub element_spacing_m: Option<f64>,
}

impl Default for ArrayParams {
    fn default() -> Self {
        Self {
            n_antennas: 128,
            n_subarrays: 32,
            subarray_size: 4,
            carrier_hz: 3.0e9,
            subcarrier_spacing_hz: 20.0e6 / 1024.0,
            n_subcarriers: 1024,
            element_spacing_m: None,
        }
    }
}

impl ArrayParams {
    /// Convenience constructor deriving `N` from `K` and `M`.
    pub fn with_partition(n_subarrays: usize, subarray_size: usize) -> Self {
        Self {
            n_antennas: n_subarrays * subarray_size,
            n_subarrays,
            subarray_size,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if self.n_subarrays == 0 || self.subarray_size == 0 || self.n_subcarriers == 0 {
            return bad(format!(
                "K = {}, M = {}, N_f = {} must all be positive",
                self.n_subarrays, self.subarray_size, self.n_subcarriers
            ));
        }
        if self.n_antennas != self.n_subarrays * self.subarray_size {
            return bad(format!(
                "N = {} is not K * M = {} * {}",
                self.n_antennas, self.n_subarrays, self.subarray_size
            ));
        }
        if !(self.carrier_hz > 0.0) || !self.carrier_hz.is_finite() {
            return bad(format!("carrier {} Hz must be positive", self.carrier_hz));
        }
        if !(self.subcarrier_spacing_hz > 0.0) || !self.subcarrier_spacing_hz.is_finite() {
            return bad(format!(
                "sub-carrier spacing {} Hz must be positive",
                self.subcarrier_spacing_hz
            ));
        }
        let bandwidth = self.n_subcarriers as f64 * self.subcarrier_spacing_hz;
        if !(bandwidth < self.carrier_hz) {
            return bad(format!(
                "total bandwidth {bandwidth} Hz must be below the carrier {} Hz",
                self.carrier_hz
            ));
        }
        if let Some(d) = self.element_spacing_m {
            if !(d > 0.0) || !d.is_finite() {
                return bad(format!("element spacing {d} m must be positive"));
            }
        }
        Ok(())
    }
}

/// A validated array with its sub-carrier indices fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    n_subarrays: usize,
    subarray_size: usize,
    carrier_hz: f64,
    subcarrier_spacing_hz: f64,
    n_subcarriers: usize,
    element_spacing_m: f64,
    freq_indices: Vec<u32>,
}

impl ArrayConfig {
    /// Builds an array from explicit 1-based sub-carrier indices, one per
    /// sub-array, pairwise distinct and within `1..=N_f`.
    pub fn new(params: ArrayParams, freq_indices: Vec<u32>) -> Result<Self> {
        params.validate()?;
        if freq_indices.len() != params.n_subarrays {
            return Err(Error::DimensionMismatch {
                what: "frequency indices",
                expected: params.n_subarrays,
                found: freq_indices.len(),
            });
        }
        for (k, &eta) in freq_indices.iter().enumerate() {
            if eta == 0 || eta as usize > params.n_subcarriers {
                return Err(Error::InvalidConfig(format!(
                    "sub-carrier index {eta} of sub-array {} outside 1..={}",
                    k + 1,
                    params.n_subcarriers
                )));
            }
            if freq_indices[..k].contains(&eta) {
                return Err(Error::InvalidConfig(format!(
                    "sub-carrier index {eta} assigned to more than one sub-array"
                )));
            }
        }
        let element_spacing_m = params
            .element_spacing_m
            .unwrap_or(SPEED_OF_LIGHT / (2.0 * params.carrier_hz));
        Ok(Self {
            n_subarrays: params.n_subarrays,
            subarray_size: params.subarray_size,
            carrier_hz: params.carrier_hz,
            subcarrier_spacing_hz: params.subcarrier_spacing_hz,
            n_subcarriers: params.n_subcarriers,
            element_spacing_m,
            freq_indices,
        })
    }

    /// Builds an array with indices from [`allocate_frequencies`].
    pub fn with_random_frequencies(params: ArrayParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let eta = allocate_frequencies(params.n_subcarriers, params.n_subarrays, seed)?;
        Self::new(params, eta)
    }

    pub fn n_antennas(&self) -> usize {
        self.n_subarrays * self.subarray_size
    }

    pub fn n_subarrays(&self) -> usize {
        self.n_subarrays
    }

    pub fn subarray_size(&self) -> usize {
        self.subarray_size
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_hz
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn element_spacing_m(&self) -> f64 {
        self.element_spacing_m
    }

    pub fn freq_indices(&self) -> &[u32] {
        &self.freq_indices
    }

    /// `B = N_f * df`.
    pub fn bandwidth_hz(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing_hz
    }

    /// False when `B > f_c / 100`, where the narrowband model gets shaky.
    pub fn is_narrowband(&self) -> bool {
        self.bandwidth_hz() <= self.carrier_hz / 100.0
    }

    /// Carrier of sub-array `k` (1-based): `f_c + eta_k df`.
    pub fn subarray_frequency_hz(&self, k: usize) -> Result<f64> {
        check_index("sub-array", k, self.n_subarrays)?;
        Ok(self.carrier_hz + self.freq_indices[k - 1] as f64 * self.subcarrier_spacing_hz)
    }

    fn phase_unchecked(&self, k0: usize, m0: usize, cos_theta: f64, distance_m: f64) -> f64 {
        let b = (k0 * self.subarray_size + m0) as f64;
        let eta = self.freq_indices[k0] as f64;
        2.0 * PI / SPEED_OF_LIGHT
            * (-b * self.carrier_hz * self.element_spacing_m * cos_theta
                + eta * self.subcarrier_spacing_hz * distance_m)
    }

    /// Phase of element `m` of sub-array `k` (both 1-based) relative to the
    /// reference element.
    pub fn phase_shift(&self, k: usize, m: usize, position: &PolarPosition) -> Result<f64> {
        check_index("sub-array", k, self.n_subarrays)?;
        check_index("element", m, self.subarray_size)?;
        Ok(self.phase_unchecked(k - 1, m - 1, cos(position.angle_rad), position.distance_m))
    }

    /// Normalized steering vector, ordered sub-array-major.
    pub fn steering_vector(&self, position: &PolarPosition) -> SteeringVector {
        let amp = 1.0 / sqrt(self.n_antennas() as f64);
        let cos_theta = cos(position.angle_rad);
        let mut entries = Vec::with_capacity(self.n_antennas());
        for k0 in 0..self.n_subarrays {
            for m0 in 0..self.subarray_size {
                let psi = self.phase_unchecked(k0, m0, cos_theta, position.distance_m);
                entries.push(Complex64::new(amp * cos(psi), amp * sin(psi)));
            }
        }
        SteeringVector(entries)
    }
}

fn check_index(what: &'static str, index: usize, len: usize) -> Result<()> {
    if index == 0 || index > len {
        return Err(Error::IndexOutOfRange { what, index, len });
    }
    Ok(())
}

/// Draws `n_subarrays` distinct sub-carrier indices uniformly from
/// `1..=n_subcarriers`. Entry `k` is the index for sub-array `k + 1`.
pub fn allocate_frequencies(
    n_subcarriers: usize,
    n_subarrays: usize,
    seed: u64,
) -> Result<Vec<u32>> {
    if n_subarrays > n_subcarriers {
        return Err(Error::InvalidConfig(format!(
            "cannot give {n_subarrays} sub-arrays distinct indices from {n_subcarriers} sub-carriers"
        )));
    }
    if n_subcarriers > u32::MAX as usize {
        return Err(Error::InvalidConfig(format!(
            "{n_subcarriers} sub-carriers exceeds the index range"
        )));
    }
    let mut rng = rng_from_seed(seed);
    Ok(index::sample(&mut rng, n_subcarriers, n_subarrays)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect())
}

/// Array response `h(theta, R)`: unit norm, every entry of magnitude `1/sqrt(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(Vec<Complex64>);

impl SteeringVector {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl core::ops::Deref for SteeringVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Analog stage shared by every sub-array: `v_a[m] = exp(j phi_m) / sqrt(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBeam {
    phases: Vec<f64>,
}

impl AnalogBeam {
    pub fn from_phases(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidConfig(
                "analog beam needs at least one phase".into(),
            ));
        }
        if let Some(p) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite analog phase {p}")));
        }
        Ok(Self { phases })
    }

    /// All phases zero.
    pub fn uniform(subarray_size: usize) -> Result<Self> {
        Self::from_phases(alloc::vec![0.0; subarray_size])
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// The unit-norm weight vector `v_a`.
    pub fn vector(&self) -> Vec<Complex64> {
        let amp = 1.0 / sqrt(self.phases.len() as f64);
        self.phases
            .iter()
            .map(|&p| Complex64::new(amp * cos(p), amp * sin(p)))
            .collect()
    }
}

/// `g = V_A^H h` for the block-diagonal analog matrix whose `K` diagonal
/// blocks all equal `v_a`: `g_k = sum_m conj(v_a[m]) h[(k-1) M + m]`.
pub fn effective_channel(h: &[Complex64], v_a: &AnalogBeam) -> Result<Vec<Complex64>> {
    let m = v_a.len();
    if h.is_empty() || h.len() % m != 0 {
        return Err(Error::DimensionMismatch {
            what: "channel length as a multiple of the sub-array size",
            expected: m * (h.len() / m).max(1),
            found: h.len(),
        });
    }
    let weights = v_a.vector();
    Ok(h.chunks_exact(m)
        .map(|block| block.iter().zip(&weights).map(|(x, w)| w.conj() * x).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use alloc::vec;
    use proptest::prelude::*;

    fn reference_config(eta: Vec<u32>) -> ArrayConfig {
        ArrayConfig::new(ArrayParams::default(), eta).unwrap()
    }

    #[test]
    fn allocation_examples() {
        let eta = allocate_frequencies(1024, 32, 5).unwrap();
        assert_eq!(eta.len(), 32);
        assert!(eta.iter().all(|&e| (1..=1024).contains(&e)));
        assert_eq!(allocate_frequencies(1, 1, 99).unwrap(), vec![1]);
        let mut perm = allocate_frequencies(4, 4, 3).unwrap();
        perm.sort_unstable();
        assert_eq!(perm, vec![1, 2, 3, 4]);
        assert_eq!(allocate_frequencies(1024, 32, 5).unwrap(), eta);
    }

    #[test]
    fn allocation_rejects_more_subarrays_than_subcarriers() {
        assert!(matches!(
            allocate_frequencies(3, 4, 0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn allocation_is_distinct_across_seeds() {
        for seed in 0..1000 {
            let mut eta = allocate_frequencies(1024, 32, seed).unwrap();
            eta.sort_unstable();
            eta.dedup();
            assert_eq!(eta.len(), 32, "seed {seed}");
        }
    }

    #[test]
    fn config_validation() {
        let p = ArrayParams {
            n_antennas: 127,
            ..Default::default()
        };
        assert!(ArrayConfig::new(p, (1..=32).collect()).is_err());

        let p = ArrayParams::default();
        let mut dup: Vec<u32> = (1..=32).collect();
        dup[5] = 1;
        assert!(ArrayConfig::new(p.clone(), dup).is_err());
        assert!(ArrayConfig::new(p.clone(), (0..32).collect()).is_err());
        assert!(ArrayConfig::new(p.clone(), (1..=31).collect()).is_err());

        let wide = ArrayParams {
            subcarrier_spacing_hz: 3.0e9 / 1024.0,
            ..Default::default()
        };
        assert!(ArrayConfig::new(wide, (1..=32).collect()).is_err());

        let bad_d = ArrayParams {
            element_spacing_m: Some(0.0),
            ..Default::default()
        };
        assert!(ArrayConfig::new(bad_d, (1..=32).collect()).is_err());

        let cfg = reference_config((1..=32).collect());
        assert!((cfg.element_spacing_m() - SPEED_OF_LIGHT / 6.0e9).abs() < 1e-15);
        assert!(cfg.is_narrowband());
        assert!((cfg.bandwidth_hz() - 20.0e6).abs() < 1e-6);
    }

    #[test]
    fn positions_are_validated() {
        assert!(PolarPosition::new(-0.1, 10.0).is_err());
        assert!(PolarPosition::new(3.2, 10.0).is_err());
        assert!(PolarPosition::new(1.0, -1.0).is_err());
        assert!(PolarPosition::new(PI, 0.0).is_ok());
    }

    #[test]
    fn phase_shift_examples() {
        let cfg = reference_config((1..=32).map(|k| 10 * k + 3).collect());
        let origin = PolarPosition::from_degrees(73.0, 0.0).unwrap();
        assert_eq!(cfg.phase_shift(1, 1, &origin).unwrap(), 0.0);

        let broadside = PolarPosition::new(PI / 2.0, 600.0).unwrap();
        for (k, m) in [(1, 1), (2, 3), (32, 4)] {
            let eta = cfg.freq_indices()[k - 1] as f64;
            let want = 2.0 * PI / SPEED_OF_LIGHT * eta * cfg.subcarrier_spacing_hz() * 600.0;
            let got = cfg.phase_shift(k, m, &broadside).unwrap();
            assert!((got - want).abs() < 1e-9 * want.abs(), "{k},{m}");
        }

        // Frozen from an independent scalar evaluation (eta_2 = 23, b = 6).
        let bob = PolarPosition::from_degrees(45.0, 600.0).unwrap();
        let got = cfg.phase_shift(2, 3, &bob).unwrap();
        assert!((got - (-7.679691528745957)).abs() < 1e-12, "{got}");

        assert!(cfg.phase_shift(0, 1, &bob).is_err());
        assert!(cfg.phase_shift(33, 1, &bob).is_err());
        assert!(cfg.phase_shift(1, 5, &bob).is_err());
    }

    #[test]
    fn steering_vector_examples() {
        let p = ArrayParams {
            n_antennas: 1,
            n_subarrays: 1,
            subarray_size: 1,
            ..ArrayParams::default()
        };
        let cfg = ArrayConfig::new(p, vec![17]).unwrap();
        let h = cfg.steering_vector(&PolarPosition::new(1.0, 0.0).unwrap());
        assert_eq!(h.as_slice(), &[Complex64::new(1.0, 0.0)]);

        let cfg = ArrayConfig::with_random_frequencies(ArrayParams::default(), 8).unwrap();
        let bob = PolarPosition::from_degrees(45.0, 600.0).unwrap();
        let h = cfg.steering_vector(&bob);
        let amp = 1.0 / (cfg.n_antennas() as f64).sqrt();
        for k in 1..=cfg.n_subarrays() {
            for m in 1..=cfg.subarray_size() {
                let psi = cfg.phase_shift(k, m, &bob).unwrap();
                let want = Complex64::from_polar(amp, psi);
                let got = h[(k - 1) * cfg.subarray_size() + m - 1];
                assert!((got - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn effective_channel_examples() {
        let cfg =
            ArrayConfig::with_random_frequencies(ArrayParams::with_partition(8, 1), 2).unwrap();
        let h = cfg.steering_vector(&PolarPosition::from_degrees(30.0, 120.0).unwrap());
        let g = effective_channel(&h, &AnalogBeam::from_phases(vec![0.0]).unwrap()).unwrap();
        assert_eq!(g.as_slice(), h.as_slice());

        let cfg =
            ArrayConfig::with_random_frequencies(ArrayParams::with_partition(6, 3), 2).unwrap();
        let h = cfg.steering_vector(&PolarPosition::from_degrees(30.0, 120.0).unwrap());
        let c = 0.83;
        let g = effective_channel(&h, &AnalogBeam::from_phases(vec![c; 3]).unwrap()).unwrap();
        for (k, gk) in g.iter().enumerate() {
            let block: Complex64 = h[3 * k..3 * k + 3].iter().sum();
            let want = Complex64::from_polar(1.0 / 3f64.sqrt(), -c) * block;
            assert!((gk - want).norm() < 1e-14);
        }

        let beam = AnalogBeam::uniform(4).unwrap();
        assert!(effective_channel(&h, &beam).is_err());
    }

    /// Dense `V_A` (N x K, column k holds v_a in rows of block k).
    fn dense_va_h_product(h: &[Complex64], beam: &AnalogBeam) -> Vec<Complex64> {
        let m = beam.len();
        let k = h.len() / m;
        let va = beam.vector();
        let n = h.len();
        let mut out = vec![Complex64::new(0.0, 0.0); k];
        for (col, acc) in out.iter_mut().enumerate() {
            for row in 0..n {
                let entry = if row / m == col {
                    va[row % m]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                *acc += entry.conj() * h[row];
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn effective_channel_matches_dense(
            k in 1usize..10,
            m in 1usize..6,
            seed in any::<u64>(),
            theta in 0.0f64..PI,
            r in 0.0f64..2000.0,
            phases in proptest::collection::vec(-PI..PI, 6),
        ) {
            let cfg = ArrayConfig::with_random_frequencies(ArrayParams::with_partition(k, m), seed).unwrap();
            let h = cfg.steering_vector(&PolarPosition::new(theta, r).unwrap());
            let beam = AnalogBeam::from_phases(phases[..m].to_vec()).unwrap();
            let fast = effective_channel(&h, &beam).unwrap();
            let dense = dense_va_h_product(&h, &beam);
            for (a, b) in fast.iter().zip(&dense) {
                prop_assert!((a - b).norm() < 1e-10);
            }
        }

        #[test]
        fn steering_vectors_are_normalized(
            k in 1usize..40,
            m in 1usize..9,
            seed in any::<u64>(),
            theta in 0.0f64..PI,
            r in 0.0f64..1e5,
        ) {
            let cfg = ArrayConfig::with_random_frequencies(ArrayParams::with_partition(k, m), seed).unwrap();
            let h = cfg.steering_vector(&PolarPosition::new(theta, r).unwrap());
            let amp = 1.0 / ((k * m) as f64).sqrt();
            prop_assert!((norm(&h) - 1.0).abs() < 1e-12);
            for x in h.iter() {
                prop_assert!((x.norm() - amp).abs() < 1e-12);
            }
        }

        #[test]
        fn range_periodicity_per_subarray(
            seed in any::<u64>(),
            sub in 1usize..=32,
            theta in 0.0f64..PI,
            r in 0.0f64..2000.0,
        ) {
            let cfg = ArrayConfig::with_random_frequencies(ArrayParams::default(), seed).unwrap();
            let eta = cfg.freq_indices()[sub - 1] as f64;
            let period = SPEED_OF_LIGHT / (eta * cfg.subcarrier_spacing_hz());
            let h0 = cfg.steering_vector(&PolarPosition::new(theta, r).unwrap());
            let h1 = cfg.steering_vector(&PolarPosition::new(theta, r + period).unwrap());
            let m = cfg.subarray_size();
            for i in (sub - 1) * m..sub * m {
                prop_assert!((h0[i] - h1[i]).norm() < 1e-9);
            }
        }
    }
}
