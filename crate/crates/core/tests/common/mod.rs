#![allow(dead_code)]

use kitaoka::lattice::GramForm;
use kitaoka::{Catalog, Elem, Field};

pub fn field(id: &str) -> Field {
    Catalog::builtin().load(id).unwrap()
}

pub fn all_fields() -> Vec<Field> {
    let cat = Catalog::builtin();
    cat.ids().map(|id| cat.load(id).unwrap()).collect()
}

/// `coords` truncated or padded to the degree.
pub fn elem_from(f: &Field, coords: &[i64]) -> Elem {
    Elem::new((0..f.degree()).map(|k| coords.get(k).copied().unwrap_or(0)).collect())
}

/// The element shifted by the least integer making it totally positive,
/// plus `extra`.
pub fn tp_from(f: &Field, coords: &[i64], extra: i64) -> Elem {
    let a = elem_from(f, coords);
    let min = f.embeddings_f64(&a).into_iter().fold(f64::INFINITY, f64::min);
    let mut n = (-min).floor() as i64 + 1 + extra;
    loop {
        let b = f.add(&a, &f.from_int(n));
        if f.is_totally_positive(&b) {
            return b;
        }
        n += 1;
    }
}

pub fn mat_mul(f: &Field, a: &[Vec<Elem>], b: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..b.len()).fold(f.zero(), |acc, k| f.add(&acc, &f.mul(&a[i][k], &b[k][j])))
                })
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

fn invert_f64(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        let piv = a[c][c];
        for v in a[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let k = a[r][c];
                let pivot_row = a[c].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v -= k * pv;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Naive representation search: Gershgorin lower bounds on each embedded
/// Gram matrix bound every embedding of every coordinate, and the resulting
/// integer box is scanned exhaustively. Returns `None` if the form is not
/// diagonally dominant at some embedding.
pub fn box_search(f: &Field, form: &GramForm, alpha: &Elem) -> Option<Option<Vec<Elem>>> {
    let d = f.degree();
    let r = form.rank();
    let emb = |a: &Elem| f.embeddings_f64(a);
    let alpha_e = emb(alpha);
    if alpha_e.iter().any(|&x| x <= 0.0) {
        return Some(None);
    }
    let g_e: Vec<Vec<Vec<f64>>> =
        (0..r).map(|i| (0..r).map(|j| emb(form.entry(i, j))).collect()).collect();
    let mut radius = vec![0.0; d];
    for s in 0..d {
        let lam = (0..r)
            .map(|i| g_e[i][i][s] - (0..r).filter(|&j| j != i).map(|j| g_e[i][j][s].abs()).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        if lam <= 1e-9 {
            return None;
        }
        radius[s] = (alpha_e[s] / lam).sqrt() + 1e-6;
    }
    let cands = embedding_box(f, &radius);
    let mut v = Vec::with_capacity(r);
    fn search(f: &Field, form: &GramForm, alpha: &Elem, cands: &[Elem], v: &mut Vec<Elem>) -> bool {
        if v.len() == form.rank() {
            return form.eval(f, v) == *alpha;
        }
        for c in cands {
            v.push(c.clone());
            if search(f, form, alpha, cands, v) {
                return true;
            }
            v.pop();
        }
        false
    }
    Some(search(f, form, alpha, &cands, &mut v).then_some(v))
}

/// Every element whose embeddings satisfy `|sigma_s(x)| <= radius[s]`.
pub fn embedding_box(f: &Field, radius: &[f64]) -> Vec<Elem> {
    let d = f.degree();
    let basis_e: Vec<Vec<f64>> = (0..d).map(|k| f.embeddings_f64(&f.basis_elem(k))).collect();
    // m[s][k] = sigma_s(omega_k)
    let m: Vec<Vec<f64>> = (0..d).map(|s| (0..d).map(|k| basis_e[k][s]).collect()).collect();
    let minv = invert_f64(&m);
    let bound: Vec<i64> = (0..d)
        .map(|k| (0..d).map(|s| minv[k][s].abs() * radius[s]).sum::<f64>().ceil() as i64)
        .collect();
    let mut out = Vec::new();
    let mut x = vec![0i64; d];
    fn fill(f: &Field, k: usize, x: &mut Vec<i64>, bound: &[i64], radius: &[f64], out: &mut Vec<Elem>) {
        if k == x.len() {
            let e = Elem::new(x.clone());
            if f.embeddings_f64(&e).iter().zip(radius).all(|(v, r)| v.abs() <= *r) {
                out.push(e);
            }
            return;
        }
        for v in -bound[k]..=bound[k] {
            x[k] = v;
            fill(f, k + 1, x, bound, radius, out);
        }
    }
    fill(f, 0, &mut x, &bound, radius, &mut out);
    out
}
