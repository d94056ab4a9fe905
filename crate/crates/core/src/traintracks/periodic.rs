use std::f64::consts::PI;

use serde::Serialize;

use super::{complete_to_convex, convex_overlap, corners, disk_overlap, extend_patch, make_track_convex, ConvexZonogon};
use crate::geometry::{cross, Point, RhombusPatch};
use crate::{Error, Result};

/// Standard tiling of the zonogon with edge vectors `2e^{iφ}` for the given directions, which
/// must be non-decreasing within `[0, π)` and not all equal: rhombus (i, j) sits at
/// Σ_{l<i} u_l + Σ_{l>j} u_l, and pairs of equal directions are skipped.
pub fn zonogon_tiling(directions: &[f64]) -> Result<RhombusPatch> {
    let n = directions.len();
    if n < 2
        || directions.windows(2).any(|w| w[1] < w[0])
        || directions[0] < 0.0
        || directions[n - 1] >= PI
        || directions[n - 1] == directions[0]
    {
        return Err(Error::InvalidRegion("zonogon directions must be sorted within [0, pi) and not all equal".into()));
    }
    let u: Vec<Point> = directions.iter().map(|&a| Point::from_polar(2.0, a)).collect();
    let mut quads = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if directions[j] == directions[i] {
                continue;
            }
            let base: Point = u[..i].iter().sum::<Point>() + u[j + 1..].iter().sum::<Point>();
            quads.push([base, base + u[i], base + u[i] + u[j], base + u[j]]);
        }
    }
    let (first, rest) = quads.split_first().expect("at least one rhombus");
    let seed = RhombusPatch::from_geometry(first.to_vec(), vec![[0, 1, 2, 3]])?;
    extend_patch(&seed, rest)
}

/// Fundamental domain and lattice of a periodic tiling containing the zonogon. With at most
/// three edge directions the zonogon tiles by itself; otherwise strips of rhombi are attached
/// along e_{m-1}, …, e_3 so that the boundary becomes γ₁γ₂γ₃γ₁⁻¹γ₂⁻¹γ₃⁻¹. Runs of parallel
/// boundary edges act as one edge, and every rhombus of the construction becomes a grid.
pub fn periodic_embedding(z: &ConvexZonogon) -> Result<(RhombusPatch, [Point; 2])> {
    let dirs = z.directions();
    let m = dirs.len();
    let g: Vec<Point> = dirs.iter().map(|&(u, k)| u * k as f64).collect();
    if m < 2 {
        return Err(Error::Geometry("zonogon has fewer than two edge directions".into()));
    }
    if m == 2 {
        return Ok((z.patch.clone(), [g[0], g[1]]));
    }
    if m == 3 {
        return Ok((z.patch.clone(), [g[0] + g[1], g[1] + g[2]]));
    }
    let start = z.patch.pos(z.boundary[0].0);
    let mut quads = Vec::new();
    for k in 1..=m - 3 {
        let t = m - k - 1;
        let (ut, kt) = dirs[t];
        let mut p = start + g[..t].iter().sum::<Point>();
        for i in 0..m - k - 2 {
            for j in (0..=i).rev() {
                let (uj, kj) = dirs[j];
                for a in 0..kj {
                    for b in 0..kt {
                        let base = p + uj * a as f64 + ut * b as f64;
                        quads.push([base, base + uj, base + uj + ut, base + ut]);
                    }
                }
                p += g[j];
            }
        }
    }
    let domain = extend_patch(&z.patch, &quads)?;
    let gamma1 = -g[m - 1] + (0..m - 3).map(|i| g[..=i].iter().sum::<Point>()).sum::<Point>();
    let gamma2: Point = g[..m - 2].iter().sum();
    let gamma3 = g[m - 2];
    Ok((domain, [gamma1 + gamma2, gamma2 + gamma3]))
}

/// Completes `p` inside `ambient` to a fundamental domain of a periodic rhombus tiling; `p` keeps
/// its vertex indices and coordinates.
pub fn embed_in_periodic(p: &RhombusPatch, ambient: &RhombusPatch) -> Result<(RhombusPatch, [Point; 2])> {
    let convex = make_track_convex(p, ambient)?;
    let z = complete_to_convex(&convex)?;
    periodic_embedding(&z)
}

/// Geometric check of a periodic tiling on a window of lattice translates.
#[derive(Clone, Debug, Serialize)]
pub struct TilingReport {
    /// Total pairwise overlap area of the translated rhombi.
    pub overlap: f64,
    /// Area of the inner disk covered by the translates, relative to the disk.
    pub coverage: f64,
    pub center: [f64; 2],
    pub radius: f64,
    /// Number of translated copies in the window.
    pub copies: usize,
    /// |det| of the lattice minus the domain area.
    pub area_defect: f64,
}

impl TilingReport {
    pub fn passes(&self, rel: f64) -> bool {
        let disk = PI * self.radius * self.radius;
        self.overlap <= rel * disk && (self.coverage - 1.0).abs() <= rel
    }
}

/// Lagrange–Gauss reduction: a basis of the same lattice with |T₁| ≤ |T₂| and |T₁·T₂| ≤ |T₁|²/2.
pub fn reduced_basis(lattice: [Point; 2]) -> [Point; 2] {
    let [mut a, mut b] = lattice;
    if a.norm_sqr() > b.norm_sqr() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let mu = ((a.re * b.re + a.im * b.im) / a.norm_sqr()).round();
        b -= a * mu;
        // ties at ±1/2 leave |b| = |a|, which is already reduced
        if b.norm_sqr() >= a.norm_sqr() {
            return [a, b];
        }
        std::mem::swap(&mut a, &mut b);
    }
}

/// Translates the domain by iT₁ + jT₂, with T₁, T₂ the reduced basis of the lattice, and
/// measures overlaps and the coverage of the disk of radius |T₁ × T₂| / |T₂| about the domain's
/// centroid. The window holds the 3×3 block and every translate that can reach the disk.
pub fn tiling_report(domain: &RhombusPatch, lattice: [Point; 2]) -> TilingReport {
    let [t1, t2] = reduced_basis(lattice);
    let det = cross(t1, t2).abs();
    let area = domain.area();
    let center = (0..domain.rhombi.len())
        .map(|r| {
            let q = corners(domain, r);
            (q[0] + q[2]) / 2.0 * cross(q[1] - q[0], q[3] - q[0])
        })
        .sum::<Point>()
        / area;
    let radius = det / t2.norm();
    let reach = domain.vertices.iter().map(|v| (v.pos - center).norm()).fold(0.0, f64::max);
    // |i T₁ + j T₂| ≥ max(|i|, |j|) · det / |T₂| for a reduced basis
    let k = ((radius + reach) / radius).ceil() as i64;
    let mut quads: Vec<[Point; 4]> = Vec::new();
    let mut copies = 0;
    for i in -k..=k {
        for j in -k..=k {
            let shift = t1 * i as f64 + t2 * j as f64;
            if (i.abs() > 1 || j.abs() > 1) && shift.norm() > radius + reach {
                continue;
            }
            copies += 1;
            quads.extend((0..domain.rhombi.len()).map(|r| corners(domain, r).map(|p| p + shift)));
        }
    }
    let boxes: Vec<[f64; 4]> = quads
        .iter()
        .map(|q| {
            let xs = q.iter().map(|p| p.re);
            let ys = q.iter().map(|p| p.im);
            [xs.clone().fold(f64::MAX, f64::min), xs.fold(f64::MIN, f64::max), ys.clone().fold(f64::MAX, f64::min), ys.fold(f64::MIN, f64::max)]
        })
        .collect();
    let mut order: Vec<usize> = (0..quads.len()).collect();
    order.sort_by(|&a, &b| boxes[a][0].total_cmp(&boxes[b][0]));
    let mut overlap = 0.0;
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if boxes[b][0] >= boxes[a][1] {
                break;
            }
            if boxes[b][2] < boxes[a][3] && boxes[a][2] < boxes[b][3] {
                overlap += convex_overlap(&quads[a], &quads[b]);
            }
        }
    }
    let covered: f64 = quads.iter().map(|q| disk_overlap(q, center, radius)).sum();
    TilingReport {
        overlap,
        coverage: covered / (PI * radius * radius),
        center: [center.re, center.im],
        radius,
        copies,
        area_defect: det - area,
    }
}
