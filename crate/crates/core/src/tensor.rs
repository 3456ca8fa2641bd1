use serde::ser::{Serialize, SerializeSeq, Serializer};

/// Dense tensor with every index running over `0..dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rank: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rank: usize, dim: usize) -> Tensor {
        Tensor {
            rank,
            dim,
            data: vec![0.0; dim.pow(rank as u32)],
        }
    }

    pub fn from_fn(rank: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Tensor {
        let mut t = Tensor::zeros(rank, dim);
        let mut idx = vec![0usize; rank];
        for slot in t.data.iter_mut() {
            *slot = f(&idx);
            advance(&mut idx, dim);
        }
        t
    }

    pub fn from_vec(rank: usize, dim: usize, data: Vec<f64>) -> Tensor {
        assert_eq!(
            data.len(),
            dim.pow(rank as u32),
            "tensor data length mismatch"
        );
        Tensor { rank, dim, data }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// All index tuples in storage order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let mut idx = vec![0usize; self.rank];
        (0..self.data.len()).map(move |_| {
            let cur = idx.clone();
            advance(&mut idx, self.dim);
            cur
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rank: self.rank,
            dim: self.dim,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

fn advance(idx: &mut [usize], dim: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < dim {
            return;
        }
        *slot = 0;
    }
}

/// Serializes as nested arrays in row-major index order.
impl Serialize for Tensor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        fn nested<S: SerializeSeq>(
            seq: &mut S,
            data: &[f64],
            rank: usize,
            dim: usize,
        ) -> Result<(), S::Error> {
            if rank == 1 {
                for v in data {
                    seq.serialize_element(v)?;
                }
                return Ok(());
            }
            let stride = data.len() / dim;
            for chunk in data.chunks(stride) {
                seq.serialize_element(&Nested {
                    data: chunk,
                    rank: rank - 1,
                    dim,
                })?;
            }
            Ok(())
        }
        struct Nested<'a> {
            data: &'a [f64],
            rank: usize,
            dim: usize,
        }
        impl Serialize for Nested<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.dim))?;
                nested(&mut seq, self.data, self.rank, self.dim)?;
                seq.end()
            }
        }
        if self.rank == 0 {
            return self.data[0].serialize(s);
        }
        Nested {
            data: &self.data,
            rank: self.rank,
            dim: self.dim,
        }
        .serialize(s)
    }
}
