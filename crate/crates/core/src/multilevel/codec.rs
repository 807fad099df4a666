use crate::error::{domain, Result};

/// Fixed-point codec `β: R → Z[0, 2^{m*})`, `γ: Z[0, 2^{m*}) → R` with
/// resolution `2^{-m*/2}` on `[−2^{m*/2−1}, 2^{m*/2−1})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPointCodec {
    m_star: u32,
}

impl FixedPointCodec {
    pub const MAX_WIDTH: u32 = 126;

    pub fn new(m_star: u32) -> Result<Self> {
        if m_star < 2 || m_star % 2 != 0 || m_star > Self::MAX_WIDTH {
            return Err(domain!("codec width m* = {m_star} must be even and in [2, {}]", Self::MAX_WIDTH));
        }
        Ok(Self { m_star })
    }

    pub fn width(&self) -> u32 {
        self.m_star
    }

    fn half(&self) -> i32 {
        (self.m_star / 2) as i32
    }

    /// `2^{-m*/2}`.
    pub fn resolution(&self) -> f64 {
        2f64.powi(-self.half())
    }

    /// `2^{m*/2−1}`: the largest magnitude encoded without clamping.
    pub fn range(&self) -> f64 {
        2f64.powi(self.half() - 1)
    }

    /// `β(z) = ⌊2^{m*/2}(z + 2^{m*/2−1})⌋`, clamped into `Z[0, 2^{m*})`.
    pub fn encode(&self, z: f64) -> u128 {
        let top = (1u128 << self.m_star) - 1;
        if z.is_nan() || z < -self.range() {
            return 0;
        }
        if z >= self.range() {
            return top;
        }
        let scaled = (z * 2f64.powi(self.half())).floor() as i128;
        ((scaled + (1i128 << (self.m_star - 1))) as u128).min(top)
    }

    /// `γ(y) = 2^{-m*/2} y − 2^{m*/2−1}`.
    pub fn decode(&self, y: u128) -> f64 {
        let centered = y as i128 - (1i128 << (self.m_star - 1));
        centered as f64 * self.resolution()
    }

    /// `γ(β(z))`.
    pub fn round_trip(&self, z: f64) -> f64 {
        self.decode(self.encode(z))
    }
}
