//! Tensor components at a base point.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

/// Components of a tensor in a coordinate frame, stored row-major in slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorValue {
    pub dim: usize,
    pub valence: Vec<Slot>,
    pub data: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(dim: usize, valence: &[Slot]) -> TensorValue {
        TensorValue {
            dim,
            valence: valence.to_vec(),
            data: vec![0.0; dim.pow(valence.len() as u32)],
        }
    }

    pub fn scalar(v: f64) -> TensorValue {
        TensorValue {
            dim: 1,
            valence: vec![],
            data: vec![v],
        }
    }

    pub fn from_fn(dim: usize, valence: &[Slot], mut f: impl FnMut(&[usize]) -> f64) -> TensorValue {
        let mut t = TensorValue::zeros(dim, valence);
        let rank = valence.len();
        let mut idx = vec![0usize; rank];
        for k in 0..t.data.len() {
            let mut r = k;
            for s in (0..rank).rev() {
                idx[s] = r % dim;
                r /= dim;
            }
            t.data[k] = f(&idx);
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &TensorValue) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// All index tuples in storage order.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        let rank = self.rank();
        (0..self.data.len())
            .map(|k| {
                let mut r = k;
                let mut idx = vec![0; rank];
                for s in (0..rank).rev() {
                    idx[s] = r % self.dim;
                    r /= self.dim;
                }
                idx
            })
            .collect()
    }

    /// Component label such as `B^1_{2 1 3}` (1-based indices).
    pub fn label(&self, name: &str, idx: &[usize]) -> String {
        let mut up = Vec::new();
        let mut down = Vec::new();
        for (s, &i) in self.valence.iter().zip(idx) {
            match s {
                Slot::Up => up.push((i + 1).to_string()),
                Slot::Down => down.push((i + 1).to_string()),
            }
        }
        let mut out = name.to_string();
        if !up.is_empty() {
            out.push('^');
            out.push_str(&up.join(""));
        }
        if !down.is_empty() {
            out.push('_');
            out.push_str(&down.join(""));
        }
        out
    }
}

impl fmt::Display for TensorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, v) in self.indices().iter().zip(&self.data) {
            writeln!(f, "{} = {:.16e}", self.label("T", idx), v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let t = TensorValue::from_fn(3, &[Slot::Up, Slot::Down], |i| (10 * i[0] + i[1]) as f64);
        assert_eq!(t.get(&[2, 1]), 21.0);
        assert_eq!(t.indices()[5], vec![1, 2]);
        assert_eq!(t.label("R", &[0, 2]), "R^1_3");
    }
}
