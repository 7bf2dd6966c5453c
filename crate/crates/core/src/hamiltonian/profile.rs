use crate::error::{Error, Result};

/// Upper bandwidth of the matrices handled here.
pub const UPPER_BAND: usize = 2;

/// LU factors, without pivoting, of a real matrix whose upper triangle is a band
/// of width 2 and whose lower triangle has an arbitrary per-row profile. The
/// lower profile fills in completely; the upper band does not grow.
#[derive(Debug, Clone)]
pub struct ProfileLu {
    n: usize,
    /// First column of each row of `L`.
    start: Vec<usize>,
    /// `L[i][start[i]..i]` (unit diagonal implied).
    lower: Vec<Vec<f64>>,
    /// `U[i][i..=i+2]`.
    upper: Vec<[f64; UPPER_BAND + 1]>,
}

/// Row `i` of the matrix as `(first column, values up to column i + 2)`.
pub type ProfileRow = (usize, Vec<f64>);

impl ProfileLu {
    /// Factors the matrix given row by row. `rows[i].1[k]` is the entry in
    /// column `rows[i].0 + k`; entries past column `i + 2` are rejected.
    pub fn factor(rows: Vec<ProfileRow>) -> Result<Self> {
        let n = rows.len();
        let mut start = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        let mut upper: Vec<[f64; UPPER_BAND + 1]> = Vec::with_capacity(n);
        for (i, (s, vals)) in rows.into_iter().enumerate() {
            if s > i || s + vals.len() > (i + UPPER_BAND + 1).min(n) {
                return Err(Error::Dimension(format!(
                    "row {i} spans columns {s}..{} outside the profile",
                    s + vals.len()
                )));
            }
            let entry = |j: usize| -> f64 {
                if j >= s && j < s + vals.len() {
                    vals[j - s]
                } else {
                    0.0
                }
            };
            let u_at = |upper: &Vec<[f64; UPPER_BAND + 1]>, k: usize, j: usize| -> f64 {
                if j >= k && j - k <= UPPER_BAND {
                    upper[k][j - k]
                } else {
                    0.0
                }
            };
            let mut l = vec![0.0; i - s];
            for j in s..i {
                let mut acc = entry(j);
                for k in j.saturating_sub(UPPER_BAND).max(s)..j {
                    acc -= l[k - s] * u_at(&upper, k, j);
                }
                l[j - s] = acc / upper[j][0];
            }
            let mut u = [0.0; UPPER_BAND + 1];
            for (d, slot) in u.iter_mut().enumerate() {
                let j = i + d;
                if j >= n {
                    break;
                }
                let mut acc = entry(j);
                for k in j.saturating_sub(UPPER_BAND).max(s)..i {
                    acc -= l[k - s] * u_at(&upper, k, j);
                }
                *slot = acc;
            }
            if u[0] == 0.0 || !u[0].is_finite() {
                return Err(Error::Iteration(format!("zero pivot in row {i}")));
            }
            start.push(s);
            lower.push(l);
            upper.push(u);
        }
        Ok(Self {
            n,
            start,
            lower,
            upper,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of stored off-diagonal entries of `L`.
    pub fn fill(&self) -> usize {
        self.lower.iter().map(Vec::len).sum()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let s = self.start[i];
            let acc: f64 = self.lower[i].iter().zip(&b[s..i]).map(|(l, y)| l * y).sum();
            b[i] -= acc;
        }
        for i in (0..self.n).rev() {
            let u = &self.upper[i];
            let mut acc = b[i];
            for d in 1..=UPPER_BAND {
                if i + d < self.n {
                    acc -= u[d] * b[i + d];
                }
            }
            b[i] = acc / u[0];
        }
    }
}
