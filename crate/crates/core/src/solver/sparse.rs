use rayon::prelude::*;

/// Symmetric matrix stored with both triangles in compressed rows, columns sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SymCsr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

const PAR_ROWS: usize = 1 << 15;

impl SymCsr {
    /// Sums duplicate entries. Both `(i, j)` and `(j, i)` must be supplied.
    pub fn from_triplets(n: usize, mut entries: Vec<(u32, u32, f64)>) -> Self {
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(u32, u32)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            indptr[i as usize + 1] += 1;
            indices.push(j);
            values.push(v);
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        SymCsr { n, indptr, indices, values }
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[i][j] = v;
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().zip(&self.values[r]).map(|(&j, &v)| (j as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&(j as u32)) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for p in self.indptr[i]..self.indptr[i + 1] {
            s += self.values[p] * x[self.indices[p] as usize];
        }
        s
    }

    /// `y = A x`; rows are independent so the parallel path is deterministic.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        if self.n >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_into(x, &mut y);
        y
    }

    pub fn quad(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row_dot(i, x)).sum()
    }

    /// Principal submatrix on `idx` (new index `k` is old index `idx[k]`).
    pub fn principal(&self, idx: &[usize]) -> SymCsr {
        let mut map = vec![u32::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            map[i] = k as u32;
        }
        let mut indptr = Vec::with_capacity(idx.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for &i in idx {
            let mut row: Vec<(u32, f64)> = self
                .row(i)
                .filter(|&(j, _)| map[j] != u32::MAX)
                .map(|(j, v)| (map[j], v))
                .collect();
            row.sort_unstable_by_key(|e| e.0);
            for (j, v) in row {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        SymCsr { n: idx.len(), indptr, indices, values }
    }

    /// Rows restricted to `rows`, columns restricted to `cols`, applied to `x` (indexed like `cols`).
    pub fn block_mul(&self, rows: &[usize], cols: &[usize], x: &[f64]) -> Vec<f64> {
        let mut xs = vec![0.0; self.n];
        for (k, &j) in cols.iter().enumerate() {
            xs[j] = x[k];
        }
        rows.iter().map(|&i| self.row_dot(i, &xs)).collect()
    }
}
