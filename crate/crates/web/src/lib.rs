//! Browser bindings for the demo page in `www/`.
//!
//! The exported functions take and return flat `f64` arrays so the page can
//! hand them straight to a canvas.

use qisg::analysis::{lq_norm, residual_norm};
use qisg::dyadic::point_to_f64;
use qisg::testfuncs::builtin_function;
use qisg::{count_points, enumerate_grid, recover_fn, QIScheme};
use wasm_bindgen::prelude::*;

/// Levels beyond this make the page sluggish without showing anything new.
const MAX_DEMO_LEVEL: u32 = 10;

fn scheme(name: &str) -> Result<QIScheme, String> {
    QIScheme::builtin(name).map_err(|e| e.to_string())
}

fn check_level(m: u32) -> Result<(), String> {
    if m > MAX_DEMO_LEVEL {
        return Err(format!("level {m} is above the demo limit {MAX_DEMO_LEVEL}"));
    }
    Ok(())
}

fn xs(samples: usize) -> impl Iterator<Item = f64> {
    (0..samples).map(move |i| i as f64 / samples as f64)
}

/// `N_{k,s}` of the scheme sampled at `i / samples`.
pub fn basis_values(scheme_name: &str, k: u32, s: usize, samples: usize) -> Result<Vec<f64>, String> {
    let scheme = scheme(scheme_name)?;
    check_level(k)?;
    let spline = scheme.spline();
    xs(samples).map(|x| spline.eval_periodic(k, s, x).map_err(|e| e.to_string())).collect()
}

/// `[f(x_i).., R_m f(x_i).., ‖f - R_m f‖_2, ‖f‖_2, n]` for a builtin
/// function on `[0, 1)`.
pub fn recovery_values(scheme_name: &str, function: &str, m: u32, samples: usize) -> Result<Vec<f64>, String> {
    let scheme = scheme(scheme_name)?;
    check_level(m)?;
    let f = builtin_function(function).map_err(|e| e.to_string())?;
    let approx = recover_fn(&scheme, 1, m, f).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = xs(samples).map(|x| f(&[x])).collect();
    out.extend(xs(samples).map(|x| approx.eval(&[x])));
    let res = 1 << (m + 4);
    out.push(residual_norm(f, &approx, 2.0, res).map_err(|e| e.to_string())?.value);
    out.push(lq_norm(f, 2.0, 1, res).map_err(|e| e.to_string())?.value);
    out.push(count_points(1, m, &scheme) as f64);
    Ok(out)
}

/// Flattened `(x, y, |k|₁)` triples of the 2-d sample grid.
pub fn grid_values(scheme_name: &str, m: u32) -> Result<Vec<f64>, String> {
    let scheme = scheme(scheme_name)?;
    check_level(m)?;
    let grid = enumerate_grid(2, m, &scheme);
    let mut out = Vec::with_capacity(3 * grid.len());
    for (p, k) in grid.iter() {
        out.extend(point_to_f64(p));
        out.push(k.norm1() as f64);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn basis(scheme_name: &str, k: u32, s: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    basis_values(scheme_name, k, s, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn recover_1d(scheme_name: &str, function: &str, m: u32, samples: usize) -> Result<Vec<f64>, JsError> {
    recovery_values(scheme_name, function, m, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sparse_grid(scheme_name: &str, m: u32) -> Result<Vec<f64>, JsError> {
    grid_values(scheme_name, m).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_peaks_at_its_centre() {
        let v = basis_values("cubic", 1, 0, 64).unwrap();
        // N_{1,0} is M_4(8x), peaking at x = 2/8
        assert!((v[16] - 2.0 / 3.0).abs() < 1e-12);
        assert!(v.iter().all(|&t| t >= 0.0));
    }

    #[test]
    fn recovery_improves_with_level() {
        let coarse = recovery_values("cubic", "kink", 3, 32).unwrap();
        let fine = recovery_values("cubic", "kink", 6, 32).unwrap();
        assert_eq!(coarse.len(), 67);
        assert!(fine[64] < coarse[64]);
        assert_eq!(fine[66], count_points(1, 6, &scheme("cubic").unwrap()) as f64);
    }

    #[test]
    fn grid_triples() {
        let v = grid_values("faber", 4).unwrap();
        assert_eq!(v.len(), 3 * 192);
        assert!(v.chunks(3).all(|t| t[2] <= 4.0 && (0.0..1.0).contains(&t[0])));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(basis_values("quintic", 1, 0, 8).is_err());
        assert!(grid_values("cubic", 11).is_err());
        assert!(recovery_values("cubic", "nope", 2, 8).is_err());
    }
}
