//! Feed-forward convolutional codes with a terminated-trellis Viterbi decoder.
//!
//! Generators are given in octal with the most significant tap on the current
//! input bit. Soft inputs follow the BPSK convention `+1 <-> 0`, `-1 <-> 1`.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvCode {
    constraint_length: usize,
    polys: Vec<u32>,
}

impl ConvCode {
    pub fn new(constraint_length: usize, polys_octal: &[u32]) -> Self {
        assert!((2..=16).contains(&constraint_length));
        assert!(!polys_octal.is_empty());
        Self {
            constraint_length,
            polys: polys_octal.to_vec(),
        }
    }

    /// The rate-1/3, K = 9 code with generators (557, 663, 711) octal.
    pub fn standard() -> Self {
        Self::new(9, &[0o557, 0o663, 0o711])
    }

    pub fn constraint_length(&self) -> usize {
        self.constraint_length
    }

    pub fn rate_inverse(&self) -> usize {
        self.polys.len()
    }

    pub fn tail_bits(&self) -> usize {
        self.constraint_length - 1
    }

    fn n_states(&self) -> usize {
        1 << (self.constraint_length - 1)
    }

    #[inline]
    fn outputs(&self, reg: u32) -> impl Iterator<Item = u8> + '_ {
        self.polys.iter().map(move |&p| ((reg & p).count_ones() & 1) as u8)
    }

    /// Encodes `bits` followed by `K - 1` zero tail bits.
    pub fn encode(&self, bits: &[u8]) -> Vec<u8> {
        let m = self.constraint_length - 1;
        let mut state = 0u32;
        let mut out = Vec::with_capacity((bits.len() + m) * self.polys.len());
        for &b in bits.iter().chain(std::iter::repeat_n(&0u8, m)) {
            let reg = ((b as u32 & 1) << m) | state;
            out.extend(self.outputs(reg));
            state = reg >> 1;
        }
        out
    }

    /// Maximum-likelihood decoding of a terminated codeword.
    ///
    /// Returns the information bits (tail removed) and the correlation metric
    /// of the surviving path.
    pub fn decode(&self, soft: &[f64]) -> (Vec<u8>, f64) {
        let r = self.polys.len();
        assert_eq!(soft.len() % r, 0, "soft input length must be a multiple of 1/rate");
        let steps = soft.len() / r;
        let m = self.constraint_length - 1;
        let ns = self.n_states();
        let mut metric = vec![f64::NEG_INFINITY; ns];
        metric[0] = 0.0;
        let mut next = vec![f64::NEG_INFINITY; ns];
        // For each step and next-state, the low bit of the predecessor state.
        let mut decisions = vec![0u8; steps * ns];

        // Branch outputs as +-1 per (input, state).
        let table: Vec<Vec<f64>> = (0..2 * ns as u32)
            .map(|reg| self.outputs(reg).map(|o| 1.0 - 2.0 * o as f64).collect())
            .collect();

        for t in 0..steps {
            let y = &soft[t * r..(t + 1) * r];
            next.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
            let tail = t + m >= steps;
            for s in 0..ns {
                let pm = metric[s];
                if pm == f64::NEG_INFINITY {
                    continue;
                }
                for b in 0..if tail { 1 } else { 2 } {
                    let reg = (b << m) | s;
                    let bm: f64 = table[reg].iter().zip(y).map(|(c, v)| c * v).sum();
                    let nstate = reg >> 1;
                    let cand = pm + bm;
                    if cand > next[nstate] {
                        next[nstate] = cand;
                        decisions[t * ns + nstate] = (s & 1) as u8;
                    }
                }
            }
            std::mem::swap(&mut metric, &mut next);
        }

        let mut state = 0usize;
        let mut bits = vec![0u8; steps];
        for t in (0..steps).rev() {
            bits[t] = (state >> (m - 1)) as u8 & 1;
            let low = decisions[t * ns + state] as usize;
            state = ((state << 1) & (ns - 1)) | low;
        }
        bits.truncate(steps.saturating_sub(m));
        (bits, metric[0])
    }
}
