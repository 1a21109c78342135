//! Complex channel math: LOS BS→RIS links, Rician RIS→UE links, cascaded
//! gains, SINR and achievable rate.
//!
//! Direct BS→UE paths are assumed blocked; every UE is reached through the
//! RIS panels only.

use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::netmodel::{Association, BaseStation, Position, RisPanel, Topology, UserEquipment};
use crate::{Error, Result};

/// Tolerance on unit-modulus phase entries.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexVec(pub Vec<Complex64>);

impl ComplexVec {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Non-conjugated bilinear product `Σ a_n b_n`.
    pub fn dot(&self, other: &[Complex64]) -> Complex64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn power(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl Deref for ComplexVec {
    type Target = Vec<Complex64>;
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl DerefMut for ComplexVec {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for ComplexVec {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// How transmissions of other UEs enter the SINR denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterferenceModel {
    /// Every other (BS, UE) allocation interferes with full power, including
    /// allocations of the serving BS.
    Literal,
    /// Allocations of one BS use disjoint sub-bands; other BSs interfere with
    /// the fraction of their power that overlaps the UE's band.
    Orthogonal,
}

impl std::str::FromStr for InterferenceModel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Self::Literal),
            "orthogonal" => Ok(Self::Orthogonal),
            other => Err(format!("unknown interference model `{other}` (literal|orthogonal)")),
        }
    }
}

impl std::fmt::Display for InterferenceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Literal => "literal",
            Self::Orthogonal => "orthogonal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Path loss at the reference distance, dB.
    pub pl0_db: f64,
    pub d0: f64,
    pub exp_bs_ris: f64,
    pub exp_ris_ue: f64,
    /// RIS→UE Rician factor, dB.
    pub rician_k_db: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    /// Element spacing in wavelengths.
    pub element_spacing_wl: f64,
    pub interference: InterferenceModel,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            pl0_db: 30.0,
            d0: 1.0,
            exp_bs_ris: 2.0,
            exp_ris_ue: 2.2,
            rician_k_db: 3.0,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            element_spacing_wl: 0.5,
            interference: InterferenceModel::Orthogonal,
        }
    }
}

impl ChannelParams {
    /// Amplitude gain of the log-distance model at distance `d`.
    pub fn amplitude_gain(&self, d: f64, exponent: f64) -> f64 {
        let pl_db = self.pl0_db + 10.0 * exponent * (d / self.d0).log10();
        10f64.powf(-pl_db / 20.0)
    }

    pub fn rician_factor(&self) -> f64 {
        10f64.powf(self.rician_k_db / 10.0)
    }

    /// Thermal noise power over `bandwidth` Hz, watts.
    pub fn noise_power(&self, bandwidth: f64) -> f64 {
        10f64.powf((self.noise_psd_dbm_hz + self.noise_figure_db - 30.0) / 10.0) * bandwidth
    }
}

/// `exp(-2jπ d/λ)`.
pub fn propagation_phase(distance: f64, wavelength: f64) -> Complex64 {
    // Reduce d/λ to its fractional part first so integer multiples map to 1 exactly.
    let cycles = (distance / wavelength).fract();
    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * cycles)
}

/// LOS BS→RIS link `H = g [h_1 … h_N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosLink {
    pub bs_id: usize,
    pub ris_id: usize,
    pub path_gain: f64,
    pub phases: ComplexVec,
}

impl LosLink {
    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.phases[n] * self.path_gain
    }
}

fn element_distances(from: &Position, ris: &RisPanel, wavelength: f64, params: &ChannelParams) -> Result<Vec<f64>> {
    let spacing = params.element_spacing_wl * wavelength;
    let ds: Vec<f64> = ris.element_positions(spacing).iter().map(|p| from.distance(p)).collect();
    if from.distance(&ris.position) < 1e-9 || ds.iter().any(|&d| d < 1e-9) {
        return Err(Error::Geometry(format!(
            "coincident positions: {:?} and RIS {} at {:?}",
            from, ris.id, ris.position
        )));
    }
    Ok(ds)
}

pub fn los_channel(bs: &BaseStation, ris: &RisPanel, wavelength: f64, params: &ChannelParams) -> Result<LosLink> {
    let ds = element_distances(&bs.position, ris, wavelength, params)?;
    let d_centre = bs.position.distance(&ris.position);
    Ok(LosLink {
        bs_id: bs.id,
        ris_id: ris.id,
        path_gain: params.amplitude_gain(d_centre, params.exp_bs_ris),
        phases: ds.iter().map(|&d| propagation_phase(d, wavelength)).collect::<Vec<_>>().into(),
    })
}

/// Rician RIS→UE link. `combined` is the unit-power mix of LOS and NLOS;
/// the physical channel is `path_gain · combined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicianLink {
    pub ris_id: usize,
    pub ue_id: usize,
    pub rician_factor: f64,
    pub path_gain: f64,
    pub los_part: ComplexVec,
    pub nlos_part: ComplexVec,
    pub combined: ComplexVec,
}

impl RicianLink {
    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.combined[n] * self.path_gain
    }

    /// Draw a fresh NLOS component, keeping the LOS part.
    pub fn redraw_nlos<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for v in self.nlos_part.iter_mut() {
            *v = circular_gaussian(rng);
        }
        self.recombine();
    }

    fn recombine(&mut self) {
        let tau = self.rician_factor;
        let (a, b) = if tau.is_infinite() {
            (1.0, 0.0)
        } else {
            ((tau / (tau + 1.0)).sqrt(), (1.0 / (tau + 1.0)).sqrt())
        };
        self.combined = self
            .los_part
            .iter()
            .zip(self.nlos_part.iter())
            .map(|(l, n)| l * a + n * b)
            .collect::<Vec<_>>()
            .into();
    }
}

/// Unit-variance circularly-symmetric complex Gaussian sample.
pub fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn rician_channel<R: Rng + ?Sized>(
    ris: &RisPanel,
    ue: &UserEquipment,
    tau: f64,
    wavelength: f64,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<RicianLink> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter { name: "tau", reason: format!("must be >= 0, got {tau}") });
    }
    let ds = element_distances(&ue.position, ris, wavelength, params)?;
    let mut link = RicianLink {
        ris_id: ris.id,
        ue_id: ue.id,
        rician_factor: tau,
        path_gain: params.amplitude_gain(ue.position.distance(&ris.position), params.exp_ris_ue),
        los_part: ds.iter().map(|&d| propagation_phase(d, wavelength)).collect::<Vec<_>>().into(),
        nlos_part: ComplexVec::zeros(ris.n_elements),
        combined: ComplexVec::zeros(ris.n_elements),
    };
    link.redraw_nlos(rng);
    Ok(link)
}

/// Per-RIS reflection coefficients `ω_m θ_{m,n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftConfig {
    /// Unit-modulus phases per RIS.
    pub thetas: Vec<ComplexVec>,
    pub amplitudes: Vec<f64>,
    /// Discrete phase indices `z_{m,n}` when the config came from quantisation.
    pub discrete: Option<Vec<Vec<u32>>>,
    pub resolution_bits: u32,
}

impl PhaseShiftConfig {
    /// Zero phase on every element, amplitudes from the panels.
    pub fn zero_phase(topology: &Topology) -> Self {
        Self {
            thetas: topology
                .ris_list
                .iter()
                .map(|r| vec![Complex64::new(1.0, 0.0); r.n_elements].into())
                .collect(),
            amplitudes: topology.ris_list.iter().map(|r| r.amplitude).collect(),
            discrete: None,
            resolution_bits: topology.ris_list.first().map_or(1, |r| r.resolution_bits),
        }
    }

    /// Concatenated phase vector over all RIS elements.
    pub fn flatten(&self) -> Vec<Complex64> {
        self.thetas.iter().flat_map(|t| t.iter().copied()).collect()
    }

    /// Replace the phases from a concatenated vector.
    pub fn with_flat(&self, flat: &[Complex64]) -> Self {
        let mut out = self.clone();
        let mut i = 0;
        for t in &mut out.thetas {
            for v in t.iter_mut() {
                *v = flat[i];
                i += 1;
            }
        }
        out.discrete = None;
        out
    }

    /// Build from discrete indices `z`, phase `z·2π/2^μ`.
    pub fn from_discrete(topology: &Topology, z: &[u32], resolution_bits: u32) -> Self {
        let levels = 1u32 << resolution_bits;
        let mut out = Self::zero_phase(topology);
        let mut rows = Vec::new();
        let mut i = 0;
        for t in &mut out.thetas {
            let mut row = Vec::with_capacity(t.len());
            for v in t.iter_mut() {
                let zi = z[i] % levels;
                *v = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * zi as f64 / levels as f64);
                row.push(zi);
                i += 1;
            }
            rows.push(row);
        }
        out.discrete = Some(rows);
        out.resolution_bits = resolution_bits;
        out
    }

    pub fn max_modulus_residual(&self) -> f64 {
        self.thetas
            .iter()
            .flat_map(|t| t.iter())
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// All links of one slot: cached LOS BS→RIS links and Rician RIS→UE links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Links {
    /// `bs_ris[b][m]`.
    pub bs_ris: Vec<Vec<LosLink>>,
    /// `ris_ue[m][k]`.
    pub ris_ue: Vec<Vec<RicianLink>>,
}

impl Links {
    pub fn build<R: Rng + ?Sized>(topology: &Topology, params: &ChannelParams, rng: &mut R) -> Result<Self> {
        let lambda = topology.wavelength;
        let bs_ris = topology
            .base_stations()
            .map(|bs| topology.ris_list.iter().map(|ris| los_channel(bs, ris, lambda, params)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        let tau = params.rician_factor();
        let mut ris_ue = Vec::with_capacity(topology.ris_list.len());
        for ris in &topology.ris_list {
            let row = topology
                .ues
                .iter()
                .map(|ue| rician_channel(ris, ue, tau, lambda, params, rng))
                .collect::<Result<Vec<_>>>()?;
            ris_ue.push(row);
        }
        Ok(Self { bs_ris, ris_ue })
    }

    /// Redraw every NLOS component (once per simulator slot).
    pub fn redraw_nlos<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for row in &mut self.ris_ue {
            for link in row {
                link.redraw_nlos(rng);
            }
        }
    }

    pub fn n_bs(&self) -> usize {
        self.bs_ris.len()
    }

    pub fn n_ues(&self) -> usize {
        self.ris_ue.first().map_or(0, |r| r.len())
    }

    fn check(&self, b: usize, k: usize, n_ris: usize) -> Result<()> {
        if b >= self.bs_ris.len() || self.bs_ris[b].len() != n_ris {
            return Err(Error::MissingLink { from: format!("BS {b}"), to: "RIS".into() });
        }
        if self.ris_ue.len() != n_ris || self.ris_ue.iter().any(|r| k >= r.len()) {
            return Err(Error::MissingLink { from: "RIS".into(), to: format!("UE {k}") });
        }
        Ok(())
    }

    /// Concatenated per-element coefficients `ω_m h_{b,m,n} conj(G_{m,k,n})`,
    /// so that the cascaded gain is `Σ θ_n c_n`.
    pub fn element_coefficients(&self, b: usize, k: usize, amplitudes: &[f64]) -> Result<Vec<Complex64>> {
        self.check(b, k, amplitudes.len())?;
        let mut out = Vec::new();
        for (m, &omega) in amplitudes.iter().enumerate() {
            let h = &self.bs_ris[b][m];
            let g = &self.ris_ue[m][k];
            for n in 0..h.phases.len() {
                out.push(h.coefficient(n) * g.coefficient(n).conj() * omega);
            }
        }
        Ok(out)
    }
}

/// `Σ_m H_{b,m} Θ_m G_{m,k}^H` for serving/interfering BS `b` and UE `k`.
pub fn cascaded_gain(b: usize, k: usize, phases: &PhaseShiftConfig, links: &Links) -> Result<Complex64> {
    links.check(b, k, phases.thetas.len())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, theta) in phases.thetas.iter().enumerate() {
        let h = &links.bs_ris[b][m];
        let g = &links.ris_ue[m][k];
        if h.phases.len() != theta.len() || g.combined.len() != theta.len() {
            return Err(Error::DimensionMismatch { expected: theta.len(), actual: h.phases.len() });
        }
        let mut s = Complex64::new(0.0, 0.0);
        for n in 0..theta.len() {
            s += h.coefficient(n) * theta[n] * g.coefficient(n).conj();
        }
        acc += s * phases.amplitudes[m];
    }
    Ok(acc)
}

/// Per-(BS, UE) transmit powers in watts, `p[b][k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub p: Vec<Vec<f64>>,
}

impl PowerAllocation {
    pub fn zeros(n_bs: usize, n_ues: usize) -> Self {
        Self { p: vec![vec![0.0; n_ues]; n_bs] }
    }

    /// Split each BS total equally across its attached UEs.
    pub fn equal_split(bs_totals: &[f64], association: &Association) -> Self {
        let n_ues = association.serving.len();
        let mut p = vec![vec![0.0; n_ues]; bs_totals.len()];
        for (b, &total) in bs_totals.iter().enumerate() {
            let attached = association.attached(b);
            if attached.is_empty() {
                continue;
            }
            let share = total / attached.len() as f64;
            for k in attached {
                p[b][k] = share;
            }
        }
        Self { p }
    }

    pub fn bs_total(&self, b: usize) -> f64 {
        self.p[b].iter().map(|v| v.abs()).sum()
    }

    pub fn validate(&self, topology: &Topology) -> Result<()> {
        for (b, row) in self.p.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::NegativePower { bs: b, ue: k, power: v });
                }
            }
            let total = self.bs_total(b);
            let p_max = topology.bs(b).p_max;
            if total > p_max * (1.0 + 1e-9) {
                return Err(Error::PowerBudget { bs: b, total, p_max });
            }
        }
        Ok(())
    }
}

/// Signal and interference weights of one UE's SINR: `ψ = |g_s|² w_s /
/// (Σ_j |g_j|² w_j + N)` where `g_j` is the cascaded gain from BS `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub serving: usize,
    pub signal_power: f64,
    /// `(bs, effective interfering power)`.
    pub interferers: Vec<(usize, f64)>,
    pub noise: f64,
    pub bandwidth: f64,
}

pub fn link_budgets(
    association: &Association,
    bandwidths: &[f64],
    powers: &PowerAllocation,
    total_bandwidth: f64,
    params: &ChannelParams,
) -> Vec<LinkBudget> {
    let n_bs = powers.p.len();
    let totals: Vec<f64> = (0..n_bs).map(|b| powers.bs_total(b)).collect();
    association
        .serving
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            let signal_power = powers.p[b][k];
            let interferers = (0..n_bs)
                .filter_map(|bp| {
                    let w = match params.interference {
                        InterferenceModel::Literal if bp == b => (totals[b] - signal_power).max(0.0),
                        InterferenceModel::Literal => totals[bp],
                        InterferenceModel::Orthogonal if bp == b => 0.0,
                        InterferenceModel::Orthogonal => totals[bp] * bandwidths[k] / total_bandwidth,
                    };
                    (w > 0.0).then_some((bp, w))
                })
                .collect();
            LinkBudget {
                serving: b,
                signal_power,
                interferers,
                noise: params.noise_power(bandwidths[k]),
                bandwidth: bandwidths[k],
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkQuality {
    pub serving: usize,
    pub sinr: f64,
    /// Achievable rate, bits/s.
    pub rate: f64,
}

/// Cascaded gains `g[b][k]` for every BS/UE pair.
pub fn gain_matrix(phases: &PhaseShiftConfig, links: &Links) -> Result<Vec<Vec<Complex64>>> {
    (0..links.n_bs())
        .map(|b| (0..links.n_ues()).map(|k| cascaded_gain(b, k, phases, links)).collect())
        .collect()
}

/// SINR and achievable rate `b_k log2(1 + ψ_k)` of every UE.
pub fn sinr_and_rate(
    topology: &Topology,
    association: &Association,
    powers: &PowerAllocation,
    phases: &PhaseShiftConfig,
    links: &Links,
    params: &ChannelParams,
) -> Result<Vec<LinkQuality>> {
    powers.validate(topology)?;
    let bandwidths = association.bandwidths(topology.bandwidth_total);
    let gains = gain_matrix(phases, links)?;
    let budgets = link_budgets(association, &bandwidths, powers, topology.bandwidth_total, params);
    Ok(budgets
        .iter()
        .enumerate()
        .map(|(k, lb)| {
            let sig = gains[lb.serving][k].norm_sqr() * lb.signal_power;
            let interf: f64 = lb.interferers.iter().map(|&(b, w)| gains[b][k].norm_sqr() * w).sum();
            let sinr = sig / (interf + lb.noise);
            LinkQuality { serving: lb.serving, sinr, rate: lb.bandwidth * (1.0 + sinr).log2() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::SleepStatus;
    use crate::netmodel::{associate_users, build_topology, NetworkParams};

    fn small_topology() -> Topology {
        build_topology(&NetworkParams { n_ues: 4, ..Default::default() }, 11).unwrap()
    }

    #[test]
    fn integer_wavelengths_give_unit_phase() {
        let p = propagation_phase(123.0 * 0.075, 0.075);
        assert!((p - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn inverse_distance_amplitude_for_exponent_two() {
        let params = ChannelParams { exp_bs_ris: 2.0, ..Default::default() };
        let g1 = params.amplitude_gain(50.0, 2.0);
        let g2 = params.amplitude_gain(100.0, 2.0);
        assert!((g2 / g1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn adjacent_element_phase_difference() {
        // Broadside ULA at λ/2 spacing, far source at angle φ: adjacent phase
        // difference tends to π sin φ. Check against exact distances.
        let lambda = 0.075;
        let params = ChannelParams::default();
        let ris = RisPanel {
            id: 0,
            position: Position { x: 0.0, y: 0.0, z: 10.0 },
            n_elements: 4,
            amplitude: 1.0,
            resolution_bits: 2,
            axis: [1.0, 0.0, 0.0],
        };
        let phi: f64 = 0.4;
        let r = 5000.0;
        let t = build_topology(&NetworkParams::default(), 1).unwrap();
        let mut bs = t.mbs.clone();
        bs.position = Position { x: r * phi.sin(), y: r * phi.cos(), z: 10.0 };
        let link = los_channel(&bs, &ris, lambda, &params).unwrap();
        let exact: Vec<f64> = ris
            .element_positions(lambda / 2.0)
            .iter()
            .map(|p| bs.position.distance(p))
            .collect();
        for n in 0..3 {
            let measured = (link.phases[n + 1] / link.phases[n]).arg();
            let direct = -2.0 * std::f64::consts::PI * (exact[n + 1] - exact[n]) / lambda;
            let wrapped = Complex64::from_polar(1.0, direct).arg();
            assert!((measured - wrapped).abs() < 1e-6);
            // Far-field approximation: element n+1 is closer by (λ/2) sin φ.
            assert!((measured - std::f64::consts::PI * phi.sin()).abs() < 1e-3);
        }
        for p in link.phases.iter() {
            assert!((p.norm() - 1.0).abs() < UNIT_MODULUS_TOL);
        }
    }

    #[test]
    fn coincident_positions_rejected() {
        let t = small_topology();
        let mut bs = t.mbs.clone();
        bs.position = t.ris_list[0].position;
        assert!(los_channel(&bs, &t.ris_list[0], t.wavelength, &ChannelParams::default()).is_err());
    }

    #[test]
    fn rician_limits() {
        let t = small_topology();
        let params = ChannelParams::default();
        let mut rng = crate::rng_from_seed(5);
        let los = rician_channel(&t.ris_list[0], &t.ues[0], 1e12, t.wavelength, &params, &mut rng).unwrap();
        for (c, l) in los.combined.iter().zip(los.los_part.iter()) {
            assert!((c - l).norm() / l.norm() < 1e-5);
        }
        let nlos = rician_channel(&t.ris_list[0], &t.ues[0], 0.0, t.wavelength, &params, &mut rng).unwrap();
        assert_eq!(nlos.combined, nlos.nlos_part);
        for n in 0..nlos.combined.len() {
            assert_eq!(nlos.coefficient(n), nlos.nlos_part[n] * nlos.path_gain);
        }
        assert!(rician_channel(&t.ris_list[0], &t.ues[0], -1.0, t.wavelength, &params, &mut rng).is_err());
    }

    #[test]
    fn rician_mixture_invariant() {
        let t = small_topology();
        let mut rng = crate::rng_from_seed(9);
        let link = rician_channel(&t.ris_list[1], &t.ues[2], 3.0, t.wavelength, &ChannelParams::default(), &mut rng)
            .unwrap();
        for n in 0..link.combined.len() {
            let expect = link.los_part[n] * (0.75f64).sqrt() + link.nlos_part[n] * (0.25f64).sqrt();
            assert!((link.combined[n] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_single_element_gain() {
        let params = NetworkParams { n_ues: 1, n_ris: 1, ris_elements: 1, ..Default::default() };
        let t = build_topology(&params, 2).unwrap();
        let mut rng = crate::rng_from_seed(1);
        let links = Links::build(&t, &ChannelParams::default(), &mut rng).unwrap();
        let phases = PhaseShiftConfig::zero_phase(&t);
        let g = cascaded_gain(0, 0, &phases, &links).unwrap();
        let expect = links.bs_ris[0][0].coefficient(0) * links.ris_ue[0][0].coefficient(0).conj();
        assert!((g - expect).norm() <= 1e-15 * expect.norm().max(1e-300));

        let zero = PhaseShiftConfig { amplitudes: vec![0.0], ..phases };
        assert_eq!(cascaded_gain(0, 0, &zero, &links).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn missing_link_is_an_error() {
        let t = small_topology();
        let mut rng = crate::rng_from_seed(1);
        let links = Links::build(&t, &ChannelParams::default(), &mut rng).unwrap();
        let phases = PhaseShiftConfig::zero_phase(&t);
        assert!(matches!(cascaded_gain(9, 0, &phases, &links), Err(Error::MissingLink { .. })));
        assert!(matches!(cascaded_gain(0, 99, &phases, &links), Err(Error::MissingLink { .. })));
    }

    #[test]
    fn zero_power_zero_rate_and_negative_rejected() {
        let t = small_topology();
        let mut rng = crate::rng_from_seed(1);
        let links = Links::build(&t, &ChannelParams::default(), &mut rng).unwrap();
        let phases = PhaseShiftConfig::zero_phase(&t);
        let assoc = associate_users(&t, &SleepStatus::all_awake(3));
        let zero = PowerAllocation::zeros(t.n_bs(), t.ues.len());
        let q = sinr_and_rate(&t, &assoc, &zero, &phases, &links, &ChannelParams::default()).unwrap();
        assert!(q.iter().all(|l| l.sinr == 0.0 && l.rate == 0.0));
        let mut neg = zero.clone();
        neg.p[0][0] = -1.0;
        assert!(matches!(
            sinr_and_rate(&t, &assoc, &neg, &phases, &links, &ChannelParams::default()),
            Err(Error::NegativePower { .. })
        ));
        let mut over = zero;
        over.p[0][0] = 25.0;
        assert!(matches!(
            sinr_and_rate(&t, &assoc, &over, &phases, &links, &ChannelParams::default()),
            Err(Error::PowerBudget { .. })
        ));
    }

    #[test]
    fn single_link_collapses_to_shannon() {
        let params = NetworkParams { n_ues: 1, n_sbs: 0, ..Default::default() };
        let t = build_topology(&params, 4).unwrap();
        let cp = ChannelParams::default();
        let mut rng = crate::rng_from_seed(2);
        let links = Links::build(&t, &cp, &mut rng).unwrap();
        let phases = PhaseShiftConfig::zero_phase(&t);
        let assoc = t.association.clone();
        let powers = PowerAllocation::equal_split(&[10.0], &assoc);
        let q = sinr_and_rate(&t, &assoc, &powers, &phases, &links, &cp).unwrap();
        let g = cascaded_gain(0, 0, &phases, &links).unwrap();
        let n0 = cp.noise_power(20e6);
        let expect = 20e6 * (1.0 + g.norm_sqr() * 10.0 / n0).log2();
        assert!((q[0].rate - expect).abs() <= 1e-9 * expect);
    }
}
