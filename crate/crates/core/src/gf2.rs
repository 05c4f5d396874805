//! Dense linear algebra over GF(2).

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitVec {
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> BitVec {
        BitVec { words: vec![0; len.div_ceil(64)] }
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }
}

#[cfg(test)]
/// Solves `A x = b` where `rows[i]` is row i of A and `rhs[i]` is b_i.
/// Free variables are set to zero, so the answer is deterministic.
pub fn solve(rows: &[BitVec], rhs: &[bool], cols: usize) -> Option<BitVec> {
    let mut m: Vec<(BitVec, bool)> = rows.iter().cloned().zip(rhs.iter().copied()).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i].0.get(c)) else { continue };
        m.swap(r, p);
        let (pivot_row, pivot_rhs) = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row.0.get(c) {
                row.0.xor_assign(&pivot_row);
                row.1 ^= pivot_rhs;
            }
        }
        pivots.push((r, c));
        r += 1;
        if r == m.len() {
            break;
        }
    }
    if m[r..].iter().any(|(_, b)| *b) {
        return None;
    }
    let mut x = BitVec::zeros(cols);
    for (row, col) in pivots {
        x.set(col, m[row].1);
    }
    Some(x)
}

/// Solves `A x = e_i` for every `i` in `targets` with one elimination.
/// `rows` are the rows of A (`rows.len()` equations over `cols` unknowns).
pub fn solve_unit_targets(rows: &[BitVec], cols: usize, targets: &[usize]) -> Vec<Option<BitVec>> {
    let n = rows.len();
    // augment each row with the matching row of the identity
    let mut m: Vec<BitVec> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut a = BitVec::zeros(cols + n);
            for c in 0..cols {
                if r.get(c) {
                    a.set(c, true);
                }
            }
            a.set(cols + i, true);
            a
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == n {
            break;
        }
        let Some(p) = (r..n).find(|&i| m[i].get(c)) else { continue };
        m.swap(r, p);
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    targets
        .iter()
        .map(|&t| {
            if m[r..].iter().any(|row| row.get(cols + t)) {
                return None;
            }
            let mut x = BitVec::zeros(cols);
            for &(row, col) in &pivots {
                x.set(col, m[row].get(cols + t));
            }
            Some(x)
        })
        .collect()
}
