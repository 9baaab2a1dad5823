/// Fill-reducing order from vertex coordinates: recursive bisection by a
/// coordinate hyperplane, separator numbered last. Returns `perm` with
/// `perm[new] = old`.
///
/// Any permutation gives an exact factor; the plane separates only when edges
/// join points of adjacent occupied planes, which holds for all lattice graphs
/// built here.
pub fn nested_dissection(coords: &[i64], dim: usize) -> Vec<usize> {
    let n = coords.len().checked_div(dim).unwrap_or(0);
    let mut ids: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    dissect(coords, dim, &mut ids, &mut out);
    out
}

const LEAF: usize = 48;

fn dissect(coords: &[i64], dim: usize, ids: &mut [usize], out: &mut Vec<usize>) {
    if ids.len() <= LEAF {
        out.extend_from_slice(ids);
        return;
    }
    let mut best = (0i64, 0usize);
    for a in 0..dim {
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for &v in ids.iter() {
            let c = coords[v * dim + a];
            lo = lo.min(c);
            hi = hi.max(c);
        }
        if hi - lo > best.0 {
            best = (hi - lo, a);
        }
    }
    if best.0 == 0 {
        out.extend_from_slice(ids);
        return;
    }
    let axis = best.1;
    let key = |v: &usize| coords[*v * dim + axis];
    let mid = ids.len() / 2;
    ids.select_nth_unstable_by_key(mid, key);
    let pivot = key(&ids[mid]);
    let mut left = Vec::new();
    let mut sep = Vec::new();
    let mut right = Vec::new();
    for &v in ids.iter() {
        match key(&v).cmp(&pivot) {
            std::cmp::Ordering::Less => left.push(v),
            std::cmp::Ordering::Equal => sep.push(v),
            std::cmp::Ordering::Greater => right.push(v),
        }
    }
    left.sort_unstable();
    right.sort_unstable();
    sep.sort_unstable();
    dissect(coords, dim, &mut left, out);
    dissect(coords, dim, &mut right, out);
    out.extend_from_slice(&sep);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_a_permutation() {
        let mut coords = Vec::new();
        for i in 0..20 {
            for j in 0..15 {
                coords.push(i);
                coords.push(j);
            }
        }
        let mut p = nested_dissection(&coords, 2);
        p.sort_unstable();
        assert_eq!(p, (0..300).collect::<Vec<_>>());
    }
}
