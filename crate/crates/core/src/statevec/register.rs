/// A contiguous run of qubits `[start, start + width)`.
///
/// The register's value inside a basis index is read with the register's
/// first qubit as its most significant bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Register {
    pub start: usize,
    pub width: usize,
}

impl Register {
    pub const fn new(start: usize, width: usize) -> Self {
        Self { start, width }
    }

    /// The register immediately following this one.
    pub const fn next(&self, width: usize) -> Self {
        Self { start: self.start + self.width, width }
    }

    pub const fn end(&self) -> usize {
        self.start + self.width
    }

    pub const fn size(&self) -> usize {
        1 << self.width
    }

    pub const fn mask(&self) -> usize {
        (1 << self.width) - 1
    }

    pub fn fits(&self, m: usize) -> bool {
        self.end() <= m
    }

    #[inline]
    fn shift(&self, m: usize) -> usize {
        m - self.end()
    }

    /// Value of the register inside basis index `idx` of an `m`-qubit state.
    #[inline]
    pub fn get(&self, idx: usize, m: usize) -> usize {
        (idx >> self.shift(m)) & self.mask()
    }

    /// Basis index with the register replaced by `value` (taken modulo `2^width`).
    #[inline]
    pub fn set(&self, idx: usize, m: usize, value: usize) -> usize {
        let sh = self.shift(m);
        (idx & !(self.mask() << sh)) | ((value & self.mask()) << sh)
    }
}
