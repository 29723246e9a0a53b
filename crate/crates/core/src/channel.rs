//! Channel-layer primitives: large-scale path loss, fractional uplink power
//! control, Rayleigh block fading, and the correlator channel estimate whose
//! contamination term drives everything downstream.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Large-scale gain C * max(r, delta_ref)^(-alpha): a power law with a
/// near-field clamp at the reference distance.
pub fn path_loss(r: f64, c_pl: f64, alpha: f64, delta_ref: f64) -> Result<f64> {
    assert!(r >= 0.0, "distance must be non-negative");
    assert!(delta_ref >= 0.0, "reference distance must be non-negative");
    assert!(alpha > 0.0, "path-loss exponent must be positive");
    assert!(c_pl > 0.0, "path-loss constant must be positive");
    let eff = r.max(delta_ref);
    if eff == 0.0 {
        return Err(Error::InfinitePathLoss);
    }
    Ok(c_pl * eff.powf(-alpha))
}

/// Fractional power control: P = P_t * beta^(-epsilon). epsilon = 0 is
/// constant power, epsilon = 1 full path-loss inversion.
pub fn tx_power(beta_serving: f64, epsilon: f64, p_t: f64) -> f64 {
    assert!(beta_serving > 0.0, "serving gain must be positive");
    assert!(p_t > 0.0, "transmit power budget must be positive");
    p_t * beta_serving.powf(-epsilon)
}

/// M i.i.d. circularly-symmetric complex Gaussian entries with unit variance
/// per entry (CN(0, I_M)). Real part then imaginary part per antenna, so the
/// draw order is reproducible.
pub fn sample_fading(m_antennas: usize, rng: &mut ChaCha8Rng) -> Vec<Complex<f64>> {
    assert!(m_antennas >= 1, "need at least one antenna");
    let mut w = Vec::with_capacity(m_antennas);
    for _ in 0..m_antennas {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        w.push(Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2);
    }
    w
}

/// The correlator estimate of the desired channel over one pilot slot: the
/// exact linear combination sum_i flag_i * sqrt(P_i) * h_i, with no
/// normalization. Link order is preserved; the desired link carries a flag
/// like any contaminator.
pub fn estimate_channel(
    true_channels: &[Vec<Complex<f64>>],
    collision_flags: &[bool],
    powers: &[f64],
) -> Vec<Complex<f64>> {
    assert_eq!(true_channels.len(), collision_flags.len());
    assert_eq!(true_channels.len(), powers.len());
    assert!(!true_channels.is_empty(), "need at least the desired link");
    let m = true_channels[0].len();
    let mut h_hat = vec![Complex::new(0.0, 0.0); m];
    for ((h, &flag), &p) in true_channels
        .iter()
        .zip(collision_flags.iter())
        .zip(powers.iter())
    {
        assert_eq!(h.len(), m, "all channel vectors must share length M");
        if !flag || p == 0.0 {
            continue;
        }
        let s = p.sqrt();
        for (acc, &x) in h_hat.iter_mut().zip(h.iter()) {
            *acc += s * x;
        }
    }
    h_hat
}

/// a^H b = sum conj(a_k) * b_k.
pub fn inner_product(a: &[Complex<f64>], b: &[Complex<f64>]) -> Complex<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr(v: &[Complex<f64>]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// One coherence block of channels between the typical BS and every link
/// that matters for the typical user's SINR. Link 0 is the desired user;
/// the rest are interferers. Channel vectors carry the large-scale gain
/// (h = sqrt(beta) * w), and `h_hat` is the correlator estimate formed from
/// the links flagged as pilot collisions.
#[derive(Debug, Clone)]
pub struct ChannelBlock {
    pub m_antennas: usize,
    /// Large-scale gain of each link toward the typical BS.
    pub beta: Vec<f64>,
    /// Uplink transmit power of each link's user.
    pub p_tx: Vec<f64>,
    /// Fading-inclusive channel vectors, h = sqrt(beta) * w.
    pub h: Vec<Vec<Complex<f64>>>,
    /// Whether the link's user sends the typical user's pilot (enters h_hat).
    pub collision: Vec<bool>,
    /// Whether the link's exact inner product enters the data-interference
    /// sum (false for the desired link and for links accounted elsewhere).
    pub data_interferer: Vec<bool>,
    /// Correlator estimate assembled from the colliding links.
    pub h_hat: Vec<Complex<f64>>,
}

impl ChannelBlock {
    /// Draws fading for every link (in link order) and forms the estimate.
    pub fn assemble(
        m_antennas: usize,
        beta: Vec<f64>,
        p_tx: Vec<f64>,
        collision: Vec<bool>,
        data_interferer: Vec<bool>,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let n = beta.len();
        assert!(n >= 1, "need at least the desired link");
        assert_eq!(p_tx.len(), n);
        assert_eq!(collision.len(), n);
        assert_eq!(data_interferer.len(), n);
        let mut h = Vec::with_capacity(n);
        for &b in &beta {
            assert!(b > 0.0 && b.is_finite(), "link gains must be positive");
            let scale = b.sqrt();
            let mut v = sample_fading(m_antennas, rng);
            for x in v.iter_mut() {
                *x *= scale;
            }
            h.push(v);
        }
        let h_hat = estimate_channel(&h, &collision, &p_tx);
        ChannelBlock {
            m_antennas,
            beta,
            p_tx,
            h,
            collision,
            data_interferer,
            h_hat,
        }
    }

    pub fn n_links(&self) -> usize {
        self.beta.len()
    }
}
