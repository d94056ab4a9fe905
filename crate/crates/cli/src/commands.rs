use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use isodimer::dirac::{inverse_dirac, Method};
use isodimer::geometry::{add_diagonals, build_patch, dual_graph, torus_quotient, IsoradialDual, Point, RegionSpec, RhombusPatch, TorusGraph};
use isodimer::measures::{
    asymptotic_local_statistic, boltzmann_probability, local_statistic, parse_pairs, torus_kasteleyn_set, BoltzmannMethod,
    CylinderQuery, Statistic,
};
use isodimer::tilings::{enumerate_matchings, initial_config, matching_from_json, matching_to_json, EdgeWeights, Sampler};
use isodimer::traintracks::embed_in_periodic;
use isodimer::Error;

use crate::svg::{render, RenderOptions};

/// Dimer statistics on isoradial rhombus-with-diagonals graphs.
#[derive(Parser, Debug)]
#[command(name = "isodimer", version)]
pub struct Cli {
    /// Largest matrix dimension allowed in determinant computations.
    #[arg(long, global = true)]
    pub max_dim: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a rhombus patch.
    Gen {
        /// rhombus:HALF_ANGLE, hex:A,B,C, square:M,N or file:PATH
        #[arg(long, value_parser = region)]
        region: RegionSpec,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate the dimer configurations of a patch.
    Enumerate {
        #[arg(long)]
        patch: PathBuf,
        #[arg(long)]
        count_only: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run the Markov chain on quadri-tilings and write the final matching.
    Sample {
        #[arg(long)]
        patch: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Probability that every listed edge is matched.
    Prob {
        #[arg(long)]
        patch: PathBuf,
        /// Edges as white:black face ids, comma separated.
        #[arg(long, value_parser = edge_list, required_unless_present = "list_edges")]
        edges: Option<String>,
        #[arg(long, value_enum, default_value_t = ProbMethod::Exact)]
        method: ProbMethod,
        /// Torus periods "ax,ay;bx,by" of the patch, for --method torus.
        #[arg(long, value_parser = lattice)]
        lattice: Option<[Point; 2]>,
        /// Torus scale, for --method torus.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Print the dual edges of the patch instead.
        #[arg(long)]
        list_edges: bool,
        #[arg(long)]
        json: bool,
    },
    /// One entry of the inverse Dirac operator.
    Invdirac {
        #[arg(long)]
        patch: PathBuf,
        #[arg(long)]
        black: usize,
        #[arg(long)]
        white: usize,
        #[arg(long, value_enum, default_value_t = InvMethod::Residues)]
        method: InvMethod,
        #[arg(long)]
        json: bool,
    },
    /// Embed a patch in a periodic rhombus tiling.
    EmbedPeriodic {
        #[arg(long)]
        patch: PathBuf,
        /// Region containing the patch (a region spec or file:PATH); defaults to the patch.
        #[arg(long, value_parser = region)]
        ambient: Option<RegionSpec>,
        /// Output file for the fundamental domain.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also draw 3x3 copies of the domain.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Torus partition function from the four Kasteleyn determinants.
    TorusZ {
        #[arg(long)]
        patch: PathBuf,
        /// Periods "ax,ay;bx,by" of the patch.
        #[arg(long, value_parser = lattice)]
        lattice: [Point; 2],
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Draw a patch, matching, heights, train-tracks or periodic copies as SVG.
    Render {
        /// Patch file; may carry a "lattice" key as written by embed-periodic.
        #[arg(long, required_unless_present = "matching")]
        patch: Option<PathBuf>,
        /// Matching file; its patch is drawn when --patch is absent.
        #[arg(long)]
        matching: Option<PathBuf>,
        /// Label every vertex with its height h1.
        #[arg(long)]
        heights: bool,
        #[arg(long)]
        tracks: bool,
        /// Number of translated copies, as COLSxROWS.
        #[arg(long, value_parser = copies)]
        lattice: Option<(usize, usize)>,
        /// Periods "ax,ay;bx,by", overriding those in the patch file.
        #[arg(long, value_parser = lattice)]
        periods: Option<[Point; 2]>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProbMethod {
    /// Gibbs measure of the infinite tiling, inverse Dirac operator by residues.
    Exact,
    /// Boltzmann measure of the torus built from the patch.
    Torus,
    /// Gibbs measure with the asymptotic inverse Dirac operator off the diagonal.
    Asymptotic,
    /// Boltzmann measure of the finite patch, by determinants.
    Boltzmann,
    /// Boltzmann measure of the finite patch, by enumeration.
    Enumerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InvMethod {
    Residues,
    Quadrature,
}

/// An inconsistency between flags that clap cannot express; exits with the usage status.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn region(s: &str) -> std::result::Result<RegionSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn edge_list(s: &str) -> std::result::Result<String, String> {
    parse_pairs(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

fn lattice(s: &str) -> std::result::Result<[Point; 2], String> {
    let v: Vec<f64> = s
        .split([',', ';'])
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format!("bad number in {s:?}: {e}"))?;
    match v[..] {
        [ax, ay, bx, by] if s.matches(';').count() == 1 => Ok([Point::new(ax, ay), Point::new(bx, by)]),
        _ => Err(format!("expected \"ax,ay;bx,by\", got {s:?}")),
    }
}

fn copies(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("expected COLSxROWS, got {s:?}"))?;
    match (a.parse::<usize>(), b.parse::<usize>()) {
        (Ok(a), Ok(b)) if a > 0 && b > 0 => Ok((a, b)),
        _ => Err(format!("expected positive COLSxROWS, got {s:?}")),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A patch file and the "lattice" key embed-periodic adds to it.
fn read_patch(path: &Path) -> Result<(RhombusPatch, Option<[Point; 2]>)> {
    let value = read_json(path)?;
    let patch = RhombusPatch::from_json(&value)?;
    let lattice = match value.get("lattice") {
        None => None,
        Some(l) => {
            let v: [[f64; 2]; 2] = serde_json::from_value(l.clone()).context("\"lattice\" must be [[ax,ay],[bx,by]]")?;
            Some([Point::new(v[0][0], v[0][1]), Point::new(v[1][0], v[1][1])])
        }
    };
    Ok((patch, lattice))
}

fn dual_of(patch: &RhombusPatch) -> Result<IsoradialDual> {
    Ok(dual_graph(&add_diagonals(patch)?))
}

fn write_out(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes") + "\n"
}

fn lattice_json(l: [Point; 2]) -> Value {
    json!([[l[0].re, l[0].im], [l[1].re, l[1].im]])
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { region, output, json } => {
            let patch = build_patch(&region)?;
            let text = pretty(&patch.to_json());
            if output.is_none() {
                return write_out(None, &text);
            }
            write_out(output.as_deref(), &text)?;
            let path = output.as_ref().map(|p| p.display().to_string());
            if json {
                println!("{}", json!({"output": path, "vertices": patch.vertices.len(), "rhombi": patch.rhombi.len()}));
            } else {
                println!("wrote {} rhombi to {}", patch.rhombi.len(), path.unwrap_or_default());
            }
            Ok(())
        }
        Command::Enumerate { patch, count_only, json } => {
            let (patch, _) = read_patch(&patch)?;
            let dual = dual_of(&patch)?;
            let all = enumerate_matchings(&dual);
            match (json, count_only) {
                (true, true) => println!("{}", json!({"count": all.len()})),
                (true, false) => {
                    let list: Vec<_> = all.iter().map(|m| m.face_pairs(&dual)).collect();
                    println!("{}", json!({"count": all.len(), "matchings": list}));
                }
                (false, true) => println!("{}", all.len()),
                (false, false) => {
                    for m in &all {
                        let pairs: Vec<String> = m.face_pairs(&dual).iter().map(|p| format!("{}:{}", p[0], p[1])).collect();
                        println!("{}", pairs.join(" "));
                    }
                }
            }
            Ok(())
        }
        Command::Sample { patch, steps, seed, output, json } => {
            let (patch, _) = read_patch(&patch)?;
            let mut sampler = Sampler::new(&add_diagonals(&patch)?, seed, EdgeWeights::Critical)?;
            sampler.run(steps)?;
            let (proposed, accepted) = (sampler.proposed, sampler.accepted);
            let (dual, m) = sampler.into_parts();
            let text = pretty(&matching_to_json(&dual, &m));
            if output.is_none() {
                return write_out(None, &text);
            }
            write_out(output.as_deref(), &text)?;
            if json {
                println!("{}", json!({"steps": steps, "seed": seed, "proposed": proposed, "accepted": accepted}));
            } else {
                println!("accepted {accepted} of {proposed} proposals");
            }
            Ok(())
        }
        Command::Prob { patch, edges, method, lattice, n, list_edges, json } => {
            let (patch, stored) = read_patch(&patch)?;
            let dual = dual_of(&patch)?;
            if list_edges {
                return print_edges(&dual, json);
            }
            let edges = edges.expect("clap requires --edges");
            let stat: Statistic = match method {
                ProbMethod::Torus => {
                    let l = lattice.or(stored).ok_or_else(|| Usage("--method torus needs --lattice".into()))?;
                    let torus = torus_quotient(&dual.tri, l, n)?;
                    let query = torus_query(&torus, &edges)?;
                    let set = torus_kasteleyn_set(&torus)?;
                    Statistic { value: set.local_statistic(&torus, &query)?, imag: 0.0 }
                }
                _ => {
                    let query = CylinderQuery::parse(&edges, &dual)?;
                    match method {
                        ProbMethod::Exact => local_statistic(&dual, &query)?,
                        ProbMethod::Asymptotic => asymptotic_local_statistic(&dual, &query)?,
                        ProbMethod::Boltzmann | ProbMethod::Enumerate => {
                            let how = if method == ProbMethod::Boltzmann { BoltzmannMethod::Determinant } else { BoltzmannMethod::Enumerate };
                            let w: Vec<f64> = dual.edges.iter().map(|e| e.nu).collect();
                            Statistic { value: boltzmann_probability(&dual, &w, &query, how)?, imag: 0.0 }
                        }
                        ProbMethod::Torus => unreachable!(),
                    }
                }
            };
            let shown = stat.value.clamp(0.0, 1.0);
            if json {
                let m = method.to_possible_value().expect("named").get_name().to_string();
                println!("{}", json!({"method": m, "value": stat.value, "imag": stat.imag, "display": shown}));
            } else {
                println!("{shown:.12} (imaginary part {:.3e})", stat.imag);
            }
            Ok(())
        }
        Command::Invdirac { patch, black, white, method, json } => {
            let (patch, _) = read_patch(&patch)?;
            let dual = dual_of(&patch)?;
            let m = match method {
                InvMethod::Residues => Method::Residues,
                InvMethod::Quadrature => Method::Quadrature,
            };
            let v = inverse_dirac(&dual, black, white, m)?;
            if json {
                let poles: Vec<Value> = v.poles.iter().map(|p| json!({"angle": p.angle, "mult": p.mult})).collect();
                println!("{}", json!({"re": v.value.re, "im": v.value.im, "poles": poles}));
            } else {
                println!("{:.15e} {:+.15e}i", v.value.re, v.value.im);
                for p in &v.poles {
                    println!("pole angle {:.12} multiplicity {}", p.angle, p.mult);
                }
            }
            Ok(())
        }
        Command::EmbedPeriodic { patch, ambient, output, svg, json } => {
            let (p, _) = read_patch(&patch)?;
            let ambient = match ambient {
                Some(spec) => build_patch(&spec)?,
                None => p.clone(),
            };
            let (domain, l) = embed_in_periodic(&p, &ambient)?;
            let mut file = domain.to_json();
            file["lattice"] = lattice_json(l);
            if let Some(out) = output.as_deref() {
                write_out(Some(out), &pretty(&file))?;
            }
            if let Some(s) = svg.as_deref() {
                let opts = RenderOptions { lattice: Some((l, (3, 3))), ..RenderOptions::default() };
                std::fs::write(s, render(&domain, &opts)?).with_context(|| format!("writing {}", s.display()))?;
            }
            if json {
                if output.is_none() {
                    println!("{}", pretty(&file).trim_end());
                } else {
                    println!("{}", json!({"lattice": lattice_json(l)}));
                }
            } else {
                println!(
                    "lattice ({}, {}) ({}, {}); fundamental domain has {} rhombi",
                    l[0].re,
                    l[0].im,
                    l[1].re,
                    l[1].im,
                    domain.rhombi.len()
                );
            }
            Ok(())
        }
        Command::TorusZ { patch, lattice, n, json } => {
            let (patch, _) = read_patch(&patch)?;
            let tri = add_diagonals(&patch)?;
            let torus = torus_quotient(&tri, lattice, n)?;
            let set = torus_kasteleyn_set(&torus)?;
            if json {
                println!("{}", json!({"Z": set.partition(), "dets": set.dets}));
            } else {
                println!("Z = {}", set.partition());
                println!("dets = {:?}", set.dets);
            }
            Ok(())
        }
        Command::Render { patch, matching, heights, tracks, lattice, periods, output, json } => {
            let (base, stored, m) = match (&patch, &matching) {
                (Some(p), m) => {
                    let (patch, stored) = read_patch(p)?;
                    let m = match m {
                        Some(path) => Some(read_matching(path, &patch)?),
                        None => None,
                    };
                    (patch, stored, m)
                }
                (None, Some(path)) => {
                    let value = read_json(path)?;
                    let dir = path.parent().unwrap_or(Path::new("."));
                    let (dual, m) = matching_from_json(&value, dir)?;
                    let patch = dual.tri.base.clone().context("matching file has no rhombus patch")?;
                    (patch, None, Some((dual, m)))
                }
                (None, None) => unreachable!("clap requires one of --patch and --matching"),
            };
            let lattice = match lattice {
                None => None,
                Some(c) => Some((periods.or(stored).ok_or_else(|| Usage("--lattice needs periods: --periods or a patch file with a \"lattice\" key".into()))?, c)),
            };
            let matching = match (m, heights) {
                (Some(m), _) => Some(m),
                (None, true) => {
                    let dual = dual_of(&base)?;
                    let m = initial_config(&dual)?;
                    Some((dual, m))
                }
                (None, false) => None,
            };
            let opts = RenderOptions { matching, heights, tracks, lattice };
            let doc = render(&base, &opts)?;
            write_out(output.as_deref(), &doc)?;
            if json && output.is_some() {
                println!("{}", json!({"output": output.as_ref().map(|p| p.display().to_string()), "bytes": doc.len()}));
            }
            Ok(())
        }
    }
}

fn read_matching(path: &Path, patch: &RhombusPatch) -> Result<(IsoradialDual, isodimer::tilings::DimerConfig)> {
    let mut value = read_json(path)?;
    if value.get("patch").is_none_or(Value::is_null) {
        value["patch"] = patch.to_json();
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    Ok(matching_from_json(&value, dir)?)
}

fn print_edges(dual: &IsoradialDual, json: bool) -> Result<()> {
    let rows: Vec<Value> = dual
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| json!({"id": i, "white": e.w, "black": e.b, "kind": e.kind, "nu": e.nu}))
        .collect();
    if json {
        println!("{}", json!({ "edges": rows }));
    } else {
        for (i, e) in dual.edges.iter().enumerate() {
            println!("{i} {}:{} {:?} nu={:.12}", e.w, e.b, e.kind, e.nu);
        }
    }
    Ok(())
}

/// Torus edges for "w:b" pairs of domain faces, taken in the first cell.
fn torus_query(torus: &TorusGraph, edges: &str) -> Result<CylinderQuery> {
    let mut out = Vec::new();
    for (w, b) in parse_pairs(edges)? {
        let tw = torus.face_index(w, (0, 0));
        let found: Vec<usize> = (0..torus.edges.len())
            .filter(|&e| torus.edges[e].w == tw && torus.faces[torus.edges[e].b].domain_face == b)
            .collect();
        match found[..] {
            [e] => out.push(e),
            [] => return Err(Error::InvalidQuery(format!("faces {w}:{b} are not a white-black edge of the torus")).into()),
            _ => return Err(Error::InvalidQuery(format!("faces {w}:{b} are joined by several torus edges; use a larger --n")).into()),
        }
    }
    Ok(CylinderQuery::new(out))
}
