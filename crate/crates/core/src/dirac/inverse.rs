use std::f64::consts::PI;

use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;
use serde::Serialize;

use super::path::{path_function, path_function_table, real_path_function, PathFunction, Pole, RVertex};
use super::Orientation;
use crate::geometry::{Color, IsoradialDual, Point, VertexKind};
use crate::{Error, Result};

/// Poles closer than this to the cut at `theta0 ± π` are rejected.
pub const BRANCH_MARGIN: f64 = 1e-6;

/// Angular gap between the quadrature contour and the cut.
const CONTOUR_GAP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Residues,
    Quadrature,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "residues" => Ok(Method::Residues),
            "quadrature" => Ok(Method::Quadrature),
            _ => Err(Error::InvalidQuery(format!("unknown method {s:?}"))),
        }
    }
}

/// Angle window `(theta0 - π, theta0 + π)` used to pick the branch of `log z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchWindow {
    pub theta0: f64,
    pub delta: f64,
}

impl BranchWindow {
    pub fn new(theta0: f64) -> Self {
        BranchWindow { theta0, delta: BRANCH_MARGIN }
    }

    /// Representative of `angle` inside the window.
    pub fn representative(&self, angle: f64) -> Result<f64> {
        let rep = self.theta0 + (angle - self.theta0 + PI).rem_euclid(2.0 * PI) - PI;
        let gap = PI - (rep - self.theta0).abs();
        if gap < self.delta {
            return Err(Error::BranchAmbiguity { angle, theta0: self.theta0 });
        }
        Ok(rep)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InverseValue {
    pub value: Complex64,
    /// Poles of `f_{wb}`, angles given by their window representatives.
    pub poles: Vec<Pole>,
}

type Dd = Complex<TwoFloat>;

fn dd(re: f64, im: f64) -> Dd {
    Complex::new(TwoFloat::from(re), TwoFloat::from(im))
}

fn dd_unit(angle: f64) -> Dd {
    let (s, c) = TwoFloat::from(angle).sin_cos();
    Complex::new(c, s)
}

fn series_mul_linear(s: &mut [Dd], d: Dd) {
    // s *= (d + t)
    for k in (0..s.len()).rev() {
        let prev = if k > 0 { s[k - 1] } else { dd(0.0, 0.0) };
        s[k] = s[k] * d + prev;
    }
}

fn series_div_linear(s: &mut [Dd], d: Dd) {
    // s /= (d + t)
    let inv = dd(1.0, 0.0) / d;
    let mut prev = dd(0.0, 0.0);
    for c in s.iter_mut() {
        *c = (*c - prev) * inv;
        prev = *c;
    }
}

/// `Σ_p Res_{z=p} f(z) log z` with `log p = i θ_p`, `θ_p` the window representative.
///
/// Residues of high-order poles cancel heavily, so the Laurent arithmetic runs in
/// double-double precision.
pub fn residue_sum(f: &PathFunction, window: &BranchWindow) -> Result<Complex64> {
    let poles = f.poles();
    let zeros: Vec<Dd> = f.numerator_roots.iter().map(|&a| dd_unit(a)).collect();
    let points: Vec<Dd> = poles.iter().map(|p| dd_unit(p.angle)).collect();
    let mut total = dd(0.0, 0.0);
    for (i, pole) in poles.iter().enumerate() {
        let m = pole.mult;
        let p = points[i];
        let mut g = vec![dd(0.0, 0.0); m];
        g[0] = dd(f.prefactor.re, f.prefactor.im);
        for &a in &zeros {
            series_mul_linear(&mut g, p - a);
        }
        for (j, q) in poles.iter().enumerate() {
            if j != i {
                for _ in 0..q.mult {
                    series_div_linear(&mut g, p - points[j]);
                }
            }
        }
        // the stored angle plus a whole number of turns
        let turns = ((window.representative(pole.angle)? - pole.angle) / (2.0 * PI)).round();
        let theta = TwoFloat::from(pole.angle) + twofloat::consts::PI * TwoFloat::from(2.0 * turns);
        // log(p + t) = i θ + Σ (-1)^{n+1} (t/p)^n / n
        let mut log = vec![Complex::new(TwoFloat::from(0.0), theta); m];
        let pinv = dd(1.0, 0.0) / p;
        let mut pow = dd(1.0, 0.0);
        for (n, l) in log.iter_mut().enumerate().skip(1) {
            pow *= pinv;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            *l = pow * TwoFloat::from(sign / n as f64);
        }
        for k in 0..m {
            total += g[k] * log[m - 1 - k];
        }
    }
    Ok(Complex64::new(f64::from(total.re), f64::from(total.im)))
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre rule over `[a, b]` with `panels` panels of 16 nodes.
fn integrate(a: f64, b: f64, panels: usize, rule: &[(f64, f64)], mut g: impl FnMut(f64) -> Complex64) -> Complex64 {
    let h = (b - a) / panels as f64;
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for &(x, wt) in rule {
            s += g(mid + 0.5 * h * x) * (0.5 * h * wt);
        }
    }
    s
}

/// `∮ f(z) log z dz` over the contour made of arcs at radii 0.75 and 1.25 spanning the window
/// (less a gap of 1e-3 at each end), joined by radial segments; 4096 nodes in total.
pub fn contour_integral(f: &PathFunction, window: &BranchWindow) -> Result<Complex64> {
    for p in f.poles() {
        let rep = window.representative(p.angle)?;
        if PI - (rep - window.theta0).abs() <= 2.0 * CONTOUR_GAP {
            return Err(Error::BranchAmbiguity { angle: p.angle, theta0: window.theta0 });
        }
    }
    let rule = gauss_legendre(16);
    let (lo, hi) = (window.theta0 - PI + CONTOUR_GAP, window.theta0 + PI - CONTOUR_GAP);
    let (r_in, r_out) = (0.75f64, 1.25f64);
    let log = |r: f64, phi: f64| Complex64::new(r.ln(), phi);
    let arc = |r: f64, phi: f64| {
        let z = Complex64::from_polar(r, phi);
        f.eval(z) * log(r, phi) * Complex64::i() * z
    };
    let radial = |r: f64, phi: f64| {
        let u = Complex64::from_polar(1.0, phi);
        f.eval(u * r) * log(r, phi) * u
    };
    let outer = integrate(lo, hi, 112, &rule, |phi| arc(r_out, phi));
    let inner = integrate(lo, hi, 112, &rule, |phi| arc(r_in, phi));
    let down = integrate(r_in, r_out, 16, &rule, |r| radial(r, hi));
    let up = integrate(r_in, r_out, 16, &rule, |r| radial(r, lo));
    Ok(outer - inner - down + up)
}

/// Branch window for the pair: `arg(b - w)`, or the edge direction when `b` and `w` coincide.
pub fn branch_window(dual: &IsoradialDual, b: usize, w: usize) -> Result<BranchWindow> {
    let d = dual.vertices[b].pos - dual.vertices[w].pos;
    if d.norm() > 1e-9 {
        return Ok(BranchWindow::new(d.arg()));
    }
    let e = dual
        .edge_between(w, b)
        .ok_or_else(|| Error::InvalidQuery(format!("faces {w} and {b} coincide but are not adjacent")))?;
    Ok(BranchWindow::new(dual.edges[e].direction().arg()))
}

fn check_pair(dual: &IsoradialDual, b: usize, w: usize) -> Result<()> {
    if b >= dual.len() || w >= dual.len() {
        return Err(Error::InvalidQuery(format!("no face pair ({b}, {w})")));
    }
    if dual.vertices[b].color != Color::Black || dual.vertices[w].color != Color::White {
        return Err(Error::InvalidQuery(format!("need a black and a white face, got ({b}, {w})")));
    }
    Ok(())
}

fn evaluate(f: &PathFunction, window: &BranchWindow, method: Method) -> Result<Complex64> {
    match method {
        Method::Residues => Ok(residue_sum(f, window)? / (2.0 * PI)),
        Method::Quadrature => Ok(contour_integral(f, window)? / Complex64::new(0.0, 4.0 * PI * PI)),
    }
}

/// `K^{-1}(b, w)` from the local formula.
pub fn inverse_dirac(dual: &IsoradialDual, b: usize, w: usize, method: Method) -> Result<InverseValue> {
    check_pair(dual, b, w)?;
    let f = path_function(dual, w, RVertex::Dual(b), None)?;
    let window = branch_window(dual, b, w)?;
    let value = evaluate(&f, &window, method)?;
    let poles = f
        .poles()
        .into_iter()
        .map(|p| Ok(Pole { angle: window.representative(p.angle)?, mult: p.mult }))
        .collect::<Result<Vec<_>>>()?;
    Ok(InverseValue { value, poles })
}

/// `K^{-1}(b, w)` for every black `b` reachable from `w`.
pub fn inverse_dirac_column(dual: &IsoradialDual, w: usize, method: Method) -> Result<Vec<Option<Complex64>>> {
    let table = path_function_table(dual, w)?;
    table
        .iter()
        .enumerate()
        .map(|(b, f)| match f {
            Some(f) if dual.vertices[b].color == Color::Black => Ok(Some(evaluate(f, &branch_window(dual, b, w)?, method)?)),
            _ => Ok(None),
        })
        .collect()
}

/// `𝖪^{-1}(b, w)`: the contour formula applied to the real path function.
pub fn inverse_real_dirac(dual: &IsoradialDual, orientation: &Orientation, b: usize, w: usize) -> Result<Complex64> {
    check_pair(dual, b, w)?;
    let f = real_path_function(dual, orientation, w, b, None)?;
    evaluate(&f, &branch_window(dual, b, w)?, Method::Residues)
}

/// Leading terms of `K^{-1}(b, w)` for `|b - w|` large.
pub fn asymptotic_inverse_dirac(b: Point, w: Point, theta1: f64, theta2: f64) -> Result<Complex64> {
    let d = b - w;
    if d.norm() < 1e-12 {
        return Err(Error::InvalidQuery("asymptotic formula needs b != w".into()));
    }
    let e = |t: f64| Complex64::from_polar(1.0, t);
    let dc = d.conj();
    let lead = 1.0 / d + e(-(theta1 + theta2)) / dc;
    let next = (e(2.0 * theta1) + e(2.0 * theta2)) / d.powi(3) + (e(-(3.0 * theta1 + theta2)) + e(-(theta1 + 3.0 * theta2))) / dc.powi(3);
    Ok((lead + next) / (2.0 * PI))
}

/// Angles `(θ1, θ2)`: `θ1 = arg(x1 - w)` and `θ2 = arg(b - x2)`, where `x1`, `x2` are the black
/// corners of the rhombus sides whose midpoints are `w` and `b`.
pub fn asymptotic_angles(dual: &IsoradialDual, w: usize, b: usize) -> Result<(f64, f64)> {
    check_pair(dual, b, w)?;
    let black_corner = |f: usize| -> Result<Point> {
        let face = &dual.tri.faces[f];
        face.verts[..2]
            .iter()
            .map(|&v| &dual.tri.vertices[v])
            .find(|v| v.kind == VertexKind::Corner && v.color == Some(Color::Black))
            .map(|v| v.pos)
            .ok_or_else(|| Error::InvalidQuery(format!("face {f} has no black rhombus corner")))
    };
    let x1 = black_corner(w)?;
    let x2 = black_corner(b)?;
    Ok(((x1 - dual.vertices[w].pos).arg(), (dual.vertices[b].pos - x2).arg()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{clockwise_odd_orientation, dirac_matrix, real_dirac_matrix};
    use crate::geometry::{add_diagonals, build_patch, dual_graph, triangle_lattice_patch, RegionSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square_lattice(m: usize, n: usize) -> IsoradialDual {
        dual_graph(&add_diagonals(&build_patch(&RegionSpec::SquareGrid { m, n }).unwrap()).unwrap())
    }

    fn nearest(d: &IsoradialDual, color: Color, p: Point) -> usize {
        (0..d.len())
            .filter(|&f| d.vertices[f].color == color)
            .min_by(|&a, &b| (d.vertices[a].pos - p).norm().total_cmp(&(d.vertices[b].pos - p).norm()))
            .unwrap()
    }

    #[test]
    fn known_residues() {
        let window = BranchWindow::new(0.0);
        let mut f = PathFunction::one();
        f.divide_root(0.0);
        f.divide_root(0.0);
        // Res (log z)/(z-1)^2 at 1 = 1
        assert!((residue_sum(&f, &window).unwrap() - 1.0).norm() < 1e-15);
        f.divide_root(0.0);
        // (1/2) (log z)'' at 1 = -1/2
        assert!((residue_sum(&f, &window).unwrap() + 0.5).norm() < 1e-15);
        let mut g = PathFunction::one();
        g.divide_root(1.0);
        g.divide_root(-1.0);
        // simple poles: log p / (p - q)
        let (p, q) = (Complex64::from_polar(1.0, 1.0), Complex64::from_polar(1.0, -1.0));
        let expect = Complex64::new(0.0, 1.0) / (p - q) + Complex64::new(0.0, -1.0) / (q - p);
        assert!((residue_sum(&g, &window).unwrap() - expect).norm() < 1e-15);
        assert!((contour_integral(&g, &window).unwrap() / Complex64::new(0.0, 2.0 * PI) - expect).norm() < 1e-12);
    }

    #[test]
    fn branch_cut_collision_is_an_error() {
        let mut f = PathFunction::one();
        f.divide_root(PI);
        f.divide_root(0.2);
        let w = BranchWindow::new(0.0);
        assert!(matches!(residue_sum(&f, &w), Err(Error::BranchAmbiguity { .. })));
        assert!(matches!(contour_integral(&f, &w), Err(Error::BranchAmbiguity { .. })));
        assert!(residue_sum(&f, &BranchWindow::new(0.5)).is_ok());
    }

    #[test]
    fn honeycomb_edges_carry_one_third() {
        let d = dual_graph(&triangle_lattice_patch(4, 4).unwrap());
        let k = dirac_matrix(&d);
        for (i, e) in d.edges.iter().enumerate() {
            assert!((e.nu - 3f64.sqrt()).abs() < 1e-12);
            let inv = inverse_dirac(&d, e.b, e.w, Method::Residues).unwrap().value;
            assert!((k.values[i] * inv - 1.0 / 3.0).norm() < 1e-9);
        }
    }

    #[test]
    fn inverse_identity_on_a_window() {
        let d = square_lattice(8, 8);
        let k = dirac_matrix(&d);
        let interior: Vec<usize> = d
            .whites()
            .into_iter()
            .filter(|&w| (d.vertices[w].pos - Point::new(8.0, 8.0)).norm() < 5.0)
            .collect();
        assert!(interior.len() > 20);
        for &w in &interior {
            let col = inverse_dirac_column(&d, w, Method::Residues).unwrap();
            for &w0 in &interior {
                let s: Complex64 = d.incident(w0).iter().map(|&e| k.values[e] * col[d.edges[e].b].unwrap()).sum();
                let target = if w0 == w { 1.0 } else { 0.0 };
                assert!((s - target).norm() < 1e-10, "{w0} {w} {s}");
            }
        }
    }

    #[test]
    fn residues_match_quadrature() {
        let d = square_lattice(6, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let (whites, blacks) = (d.whites(), d.blacks());
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let w = whites[rng.gen_range(0..whites.len())];
            let b = blacks[rng.gen_range(0..blacks.len())];
            let r = inverse_dirac(&d, b, w, Method::Residues).unwrap();
            let q = inverse_dirac(&d, b, w, Method::Quadrature).unwrap();
            worst = worst.max((r.value - q.value).norm());
            assert_eq!(r.poles, q.poles);
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn column_matches_pointwise() {
        let d = square_lattice(3, 3);
        let w = d.whites()[4];
        let col = inverse_dirac_column(&d, w, Method::Residues).unwrap();
        for b in d.blacks() {
            let v = inverse_dirac(&d, b, w, Method::Residues).unwrap().value;
            assert!((col[b].unwrap() - v).norm() < 1e-13);
        }
        assert!(inverse_dirac(&d, w, w, Method::Residues).is_err());
    }

    #[test]
    fn real_inverse_relations() {
        let d = square_lattice(6, 6);
        let o = clockwise_odd_orientation(&d).unwrap();
        let k = dirac_matrix(&d);
        let kk = real_dirac_matrix(&d, &o);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (whites, blacks) = (d.whites(), d.blacks());
        for _ in 0..30 {
            let w = whites[rng.gen_range(0..whites.len())];
            let b = blacks[rng.gen_range(0..blacks.len())];
            let real = inverse_real_dirac(&d, &o, b, w).unwrap();
            let f0 = real_path_function(&d, &o, w, b, None).unwrap().eval(Complex64::new(0.0, 0.0));
            let complex = inverse_dirac(&d, b, w, Method::Residues).unwrap().value;
            assert!((real - f0.conj() * complex).norm() < 1e-10);
        }
        for (i, e) in d.edges.iter().enumerate() {
            let lhs = kk.values[i] * inverse_real_dirac(&d, &o, e.b, e.w).unwrap();
            let rhs = k.values[i] * inverse_dirac(&d, e.b, e.w, Method::Residues).unwrap().value;
            assert!((lhs - rhs).norm() < 1e-10);
        }
        let w = nearest(&d, Color::White, Point::new(6.0, 6.0));
        for w0 in [w, nearest(&d, Color::White, Point::new(7.0, 5.0))] {
            let s: Complex64 = d
                .incident(w0)
                .iter()
                .map(|&e| kk.values[e] * inverse_real_dirac(&d, &o, d.edges[e].b, w).unwrap())
                .sum();
            assert!((s - if w0 == w { 1.0 } else { 0.0 }).norm() < 1e-10);
        }
    }

    #[test]
    fn asymptotic_formula_examples() {
        let r = 7.0;
        let v = asymptotic_inverse_dirac(Point::new(r, 0.0), Point::new(0.0, 0.0), 0.0, 0.0).unwrap();
        assert!((v - (1.0 / (PI * r) + 2.0 / (PI * r.powi(3)))).norm() < 1e-15);
        let (b, w) = (Point::new(3.0, -4.5), Point::new(0.2, 1.0));
        let a = asymptotic_inverse_dirac(b, w, 0.4, -1.3).unwrap();
        let s = asymptotic_inverse_dirac(b, w, -1.3, 0.4).unwrap();
        assert!((a - s).norm() < 1e-15);
        assert!(asymptotic_inverse_dirac(w, w, 0.0, 0.0).is_err());
    }

    #[test]
    fn asymptotic_error_is_cubic() {
        let d = square_lattice(24, 4);
        let w = nearest(&d, Color::White, Point::new(4.0, 4.0));
        let b0 = nearest(&d, Color::Black, d.vertices[w].pos + Point::new(1.0, 0.3));
        let (t1, t2) = asymptotic_angles(&d, w, b0).unwrap();
        let col = inverse_dirac_column(&d, w, Method::Residues).unwrap();
        let mut scaled = Vec::new();
        for k in 1..10 {
            let target = d.vertices[b0].pos + Point::new(4.0 * k as f64, 0.0);
            let b = nearest(&d, Color::Black, target);
            assert!((d.vertices[b].pos - target).norm() < 1e-9);
            assert_eq!(asymptotic_angles(&d, w, b).unwrap(), (t1, t2));
            let r = (d.vertices[b].pos - d.vertices[w].pos).norm();
            let asy = asymptotic_inverse_dirac(d.vertices[b].pos, d.vertices[w].pos, t1, t2).unwrap();
            scaled.push((col[b].unwrap() - asy).norm() * r.powi(3));
        }
        let max = scaled.iter().cloned().fold(0.0, f64::max);
        assert!(max < 1.0 && scaled.last().unwrap() <= &(1.05 * scaled[2]), "{scaled:?}");
    }
}
