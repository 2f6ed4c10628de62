use alloc::vec::Vec;

use num_traits::Zero;

use super::{ComplexMatrix, LinalgError, SubsystemLayout, C64};

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Kronecker product of a sequence of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    let mut it = factors.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, f| kron(&acc, f)))
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` acting on `site`.
pub fn embed(op: &ComplexMatrix, site: usize, layout: &SubsystemLayout) -> Result<ComplexMatrix, LinalgError> {
    embed_many(&[(site, op)], layout)
}

/// Tensor product of single-site operators placed on distinct sites, with
/// identities elsewhere.
pub fn embed_many(ops: &[(usize, &ComplexMatrix)], layout: &SubsystemLayout) -> Result<ComplexMatrix, LinalgError> {
    let sites: Vec<usize> = ops.iter().map(|(s, _)| *s).collect();
    if !sites.is_empty() {
        layout.check_sites(&sites)?;
    }
    for &(site, op) in ops {
        let d = layout.dims()[site];
        if op.rows() != d || op.cols() != d {
            return Err(LinalgError::DimensionMismatch {
                expected: d,
                found: op.rows().max(op.cols()),
            });
        }
    }
    let n = layout.total_dim();
    let mut out = ComplexMatrix::zeros(n, n);
    // Each factor is applied digit-wise; entries vanish unless untouched
    // sites agree between row and column.
    let touched: Vec<bool> = (0..layout.n_sites()).map(|s| sites.contains(&s)).collect();
    for c in 0..n {
        for r in 0..n {
            let mut v = C64::new(1.0, 0.0);
            for (site, &t) in touched.iter().enumerate() {
                let (dr, dc) = (layout.digit(r, site), layout.digit(c, site));
                if !t && dr != dc {
                    v = C64::zero();
                    break;
                }
            }
            if v.is_zero() {
                continue;
            }
            for &(site, op) in ops {
                v *= op[(layout.digit(r, site), layout.digit(c, site))];
                if v.is_zero() {
                    break;
                }
            }
            out[(r, c)] = v;
        }
    }
    Ok(out)
}

fn check_square_on(rho: &ComplexMatrix, layout: &SubsystemLayout) -> Result<(), LinalgError> {
    if !rho.is_square() {
        return Err(LinalgError::NotSquare {
            rows: rho.rows(),
            cols: rho.cols(),
        });
    }
    if rho.rows() != layout.total_dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: layout.total_dim(),
            found: rho.rows(),
        });
    }
    Ok(())
}

/// Reduced matrix on the `keep` sites (kept in ascending site order).
pub fn partial_trace(rho: &ComplexMatrix, keep: &[usize], layout: &SubsystemLayout) -> Result<ComplexMatrix, LinalgError> {
    check_square_on(rho, layout)?;
    layout.check_sites(keep)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..layout.n_sites()).filter(|s| !kept.contains(s)).collect();
    let kept_layout = layout.sub_layout(&kept)?;
    let traced_dim: usize = traced.iter().map(|&s| layout.dims()[s]).product();
    let traced_layout = if traced.is_empty() {
        None
    } else {
        Some(layout.sub_layout(&traced)?)
    };

    let m = kept_layout.total_dim();
    let full_index = |k: usize, t: usize| -> usize {
        let mut idx = 0;
        for (i, &s) in kept.iter().enumerate() {
            idx += kept_layout.digit(k, i) * layout.stride(s);
        }
        if let Some(tl) = &traced_layout {
            for (i, &s) in traced.iter().enumerate() {
                idx += tl.digit(t, i) * layout.stride(s);
            }
        }
        idx
    };
    let mut out = ComplexMatrix::zeros(m, m);
    for c in 0..m {
        for r in 0..m {
            let mut acc = C64::zero();
            for t in 0..traced_dim {
                acc += rho[(full_index(r, t), full_index(c, t))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transpose on the indices of `part` only.
pub fn partial_transpose(rho: &ComplexMatrix, part: usize, layout: &SubsystemLayout) -> Result<ComplexMatrix, LinalgError> {
    check_square_on(rho, layout)?;
    layout.check_sites(&[part])?;
    let stride = layout.stride(part);
    let n = rho.rows();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (dr, dc) = (layout.digit(r, part), layout.digit(c, part));
        // swap the `part` digits of row and column
        let r2 = r - dr * stride + dc * stride;
        let c2 = c - dc * stride + dr * stride;
        rho[(r2, c2)]
    }))
}
