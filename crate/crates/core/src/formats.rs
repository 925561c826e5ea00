//! Text formats shared with the command-line driver.
//!
//! All formats are line oriented, `#` starts a comment and blank lines are
//! skipped. Errors carry 1-based line and column numbers.
//!
//! Complex entries in gate lists are written `x`, `x,y` (real and
//! imaginary part) or `phase:t` for `e^{iπt}`.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{c, exp_x, exp_z, hadamard2, identity2, Mat2};
use crate::tn_sampler::{DiagonalGate, QuditSystem};
use crate::two_local::TwoLocalFunction;
use crate::C64;

struct Tok<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

impl Tok<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: self.line, col: self.col, msg: msg.into() })
    }

    fn usize(&self) -> Result<usize> {
        self.text.parse().or_else(|_| self.err(format!("expected a non-negative integer, found '{}'", self.text)))
    }

    fn f64(&self) -> Result<f64> {
        match self.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => self.err(format!("expected a number, found '{}'", self.text)),
        }
    }

    fn complex(&self) -> Result<C64> {
        if let Some(t) = self.text.strip_prefix("phase:") {
            return match t.parse::<f64>() {
                Ok(t) if t.is_finite() => Ok(C64::from_polar(1.0, std::f64::consts::PI * t)),
                _ => self.err(format!("bad phase '{t}'")),
            };
        }
        let parse = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        let v = match self.text.split_once(',') {
            Some((re, im)) => parse(re).zip(parse(im)).map(|(a, b)| c(a, b)),
            None => parse(self.text).map(|a| c(a, 0.0)),
        };
        v.map_or_else(|| self.err(format!("expected a complex entry, found '{}'", self.text)), Ok)
    }
}

/// Non-empty, comment-stripped lines split into tokens with positions.
fn lines(text: &str) -> Vec<Vec<Tok<'_>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut start = None;
        for (j, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(j),
                (true, Some(s)) => {
                    toks.push(Tok { text: &body[s..j], line: i + 1, col: body[..s].chars().count() + 1 });
                    start = None;
                }
                _ => {}
            }
        }
        if !toks.is_empty() {
            out.push(toks);
        }
    }
    out
}

fn check_vertex(t: &Tok, n: usize) -> Result<usize> {
    let v = t.usize()?;
    if v >= n {
        return t.err(format!("vertex {v} out of range for n = {n}"));
    }
    Ok(v)
}

fn arity(line: &[Tok], min: usize, max: usize) -> Result<()> {
    if line.len() < min || line.len() > max {
        let t = line.get(max).unwrap_or(&line[0]);
        return t.err(format!("'{}' takes {} to {} fields, found {}", line[0].text, min - 1, max - 1, line.len() - 1));
    }
    Ok(())
}

fn header(ls: &[Vec<Tok>], key: &str) -> Result<usize> {
    let first = ls.first().ok_or(Error::Parse { line: 1, col: 1, msg: format!("empty input, expected '{key} <count>'") })?;
    if first[0].text != key || first.len() != 2 {
        return first[0].err(format!("expected header '{key} <count>'"));
    }
    first[1].usize()
}

/// A graph with optional couplings (`J = 1` when omitted).
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFile {
    pub graph: Graph,
    pub couplings: Vec<(usize, usize, f64)>,
}

/// `n <count>`, then `e <u> <v> [J]`, optional `rot <v> <neighbors...>` for
/// every vertex, optional `outer <v...>`.
pub fn parse_graph(text: &str) -> Result<GraphFile> {
    let ls = lines(text);
    let n = header(&ls, "n")?;
    let mut graph = Graph::new(n);
    let mut couplings = Vec::new();
    let mut rot: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut any_rot = None;
    let mut outer = None;
    for line in &ls[1..] {
        match line[0].text {
            "e" => {
                arity(line, 3, 4)?;
                let (u, v) = (check_vertex(&line[1], n)?, check_vertex(&line[2], n)?);
                if u == v {
                    return line[2].err("self-loop");
                }
                if graph.has_edge(u, v) {
                    return line[0].err(format!("duplicate edge {u}-{v}"));
                }
                graph.add_edge(u, v)?;
                let j = if line.len() == 4 { line[3].f64()? } else { 1.0 };
                couplings.push((u, v, j));
            }
            "rot" => {
                arity(line, 2, n + 2)?;
                let v = check_vertex(&line[1], n)?;
                if rot[v].is_some() {
                    return line[1].err(format!("second rotation for vertex {v}"));
                }
                rot[v] = Some(line[2..].iter().map(|t| check_vertex(t, n)).collect::<Result<_>>()?);
                any_rot.get_or_insert(line[0].line);
            }
            "outer" => {
                outer = Some((line[0].line, line[1..].iter().map(|t| check_vertex(t, n)).collect::<Result<Vec<_>>>()?));
            }
            other => return line[0].err(format!("unknown record '{other}'")),
        }
    }
    if let Some(at) = any_rot {
        if let Some(v) = rot.iter().position(Option::is_none) {
            return Err(Error::Parse { line: at, col: 1, msg: format!("rotation missing for vertex {v}") });
        }
        graph
            .set_rotation_system(rot.into_iter().map(Option::unwrap).collect())
            .map_err(|e| Error::Parse { line: at, col: 1, msg: e.to_string() })?;
    }
    if let Some((at, face)) = outer {
        graph.set_outer_face(face).map_err(|e| Error::Parse { line: at, col: 1, msg: e.to_string() })?;
    }
    Ok(GraphFile { graph, couplings })
}

pub fn write_graph(graph: &Graph, couplings: &[(usize, usize, f64)]) -> String {
    let mut s = format!("n {}\n", graph.n());
    for &(u, v, j) in couplings {
        s.push_str(&format!("e {u} {v} {j}\n"));
    }
    if let Some(rot) = graph.rotation_system() {
        for (v, r) in rot.iter().enumerate() {
            let list: Vec<String> = r.iter().map(|w| w.to_string()).collect();
            s.push_str(&format!("rot {v} {}\n", list.join(" ")));
        }
    }
    if let Some(face) = graph.outer_face() {
        let list: Vec<String> = face.iter().map(|w| w.to_string()).collect();
        s.push_str(&format!("outer {}\n", list.join(" ")));
    }
    s
}

/// Reads `k` complex values from `toks`: each is either a `phase:t` token
/// or a pair of real tokens.
fn complex_pairs(toks: &[Tok], k: usize, what: &Tok) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(k);
    let mut i = 0;
    while out.len() < k {
        let t = match toks.get(i) {
            Some(t) => t,
            None => return what.err(format!("'{}' needs {k} complex entries", what.text)),
        };
        if t.text.starts_with("phase:") {
            out.push(t.complex()?);
            i += 1;
        } else {
            let im = toks.get(i + 1).map_or_else(|| t.err("missing imaginary part"), Tok::f64)?;
            out.push(c(t.f64()?, im));
            i += 2;
        }
    }
    if let Some(t) = toks.get(i) {
        return t.err("trailing fields");
    }
    Ok(out)
}

/// Binary two-local function: `n <count>`, then `v <u> <re0> <im0> <re1> <im1>`,
/// `e <u> <v>` followed by four row-major entries (index `2·x_u + x_v`) and
/// an optional `scalar <re> <im>`. Any `re im` pair may be replaced by one
/// `phase:t` token. Missing terms are 1.
pub fn parse_two_local(text: &str) -> Result<TwoLocalFunction> {
    let ls = lines(text);
    let n = header(&ls, "n")?;
    let mut edges = Vec::new();
    let mut vterms = Vec::new();
    let mut eterms = Vec::new();
    let mut scalar = c(1.0, 0.0);
    for line in &ls[1..] {
        match line[0].text {
            "v" => {
                if line.len() < 2 {
                    return line[0].err("missing vertex");
                }
                let u = check_vertex(&line[1], n)?;
                vterms.push((u, complex_pairs(&line[2..], 2, &line[0])?, &line[1]));
            }
            "e" => {
                if line.len() < 3 {
                    return line[0].err("missing edge endpoints");
                }
                let (u, v) = (check_vertex(&line[1], n)?, check_vertex(&line[2], n)?);
                if u == v {
                    return line[2].err("self-loop");
                }
                if edges.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u)) {
                    return line[0].err(format!("duplicate edge {u}-{v}"));
                }
                edges.push((u, v));
                eterms.push((u, v, complex_pairs(&line[3..], 4, &line[0])?));
            }
            "scalar" => scalar = complex_pairs(&line[1..], 1, &line[0])?[0],
            other => return line[0].err(format!("unknown record '{other}'")),
        }
    }
    let mut f = TwoLocalFunction::new(Graph::from_edges(n, &edges)?, 2);
    for (u, t, tok) in vterms {
        f.multiply_vertex_term(u, &t).or_else(|e| tok.err(e.to_string()))?;
    }
    for (u, v, t) in eterms {
        f.set_edge_term(u, v, t)?;
    }
    f.scale(scalar);
    Ok(f)
}

/// `H`, `I`, `rx:θ` (`e^{-iθX}`), `rz:θ` (`e^{-iθZ}`), `proj:ab` (`|a⟩⟨b|`)
/// or `mat:` with eight comma-separated reals (row-major re, im pairs).
pub fn parse_op(spec: &str) -> Result<Mat2> {
    let bad = |msg: String| Error::InvalidArgument(format!("operator '{spec}': {msg}"));
    let angle = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(format!("bad angle '{s}'")));
    match spec.split_once(':') {
        None if spec == "H" => Ok(hadamard2()),
        None if spec == "I" => Ok(identity2()),
        Some(("rx", a)) => Ok(exp_x(angle(a)?)),
        Some(("rz", a)) => Ok(exp_z(angle(a)?)),
        Some(("proj", ab)) => match ab.as_bytes() {
            [a @ b'0'..=b'1', b @ b'0'..=b'1'] => {
                let mut m = [c(0.0, 0.0); 4];
                m[2 * (a - b'0') as usize + (b - b'0') as usize] = c(1.0, 0.0);
                Ok(m)
            }
            _ => Err(bad("expected two bits".into())),
        },
        Some(("mat", vals)) => {
            let v: Vec<f64> = vals.split(',').map(|s| angle(s.trim())).collect::<Result<_>>()?;
            if v.len() != 8 {
                return Err(bad(format!("expected 8 numbers, found {}", v.len())));
            }
            Ok([c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])])
        }
        _ => Err(bad("unknown kind".into())),
    }
}

/// One spec for every vertex, or `n` specs separated by `;`.
pub fn parse_ops(spec: &str, n: usize) -> Result<Vec<Mat2>> {
    let parts: Vec<&str> = spec.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
    match parts.len() {
        1 => Ok(vec![parse_op(parts[0])?; n]),
        k if k == n => parts.iter().map(|s| parse_op(s)).collect(),
        k => Err(Error::InvalidArgument(format!("{k} operator specs for {n} vertices"))),
    }
}

/// `n <count>`, `d <dim>`, then per qudit optionally `chi <q> <d reals>` (the
/// diagonal of its initial state; uniform when absent), `op <q> <d² entries>`
/// (identity when absent) and any number of `gate <q1> ... <qk> : <d^k entries>`.
pub fn parse_tn_system(text: &str) -> Result<QuditSystem> {
    let ls = lines(text);
    let n = header(&ls, "n")?;
    let dline = ls.get(1).ok_or(Error::Parse { line: 1, col: 1, msg: "missing 'd <dim>' line".into() })?;
    if dline[0].text != "d" || dline.len() != 2 {
        return dline[0].err("expected 'd <dim>'");
    }
    let d = dline[1].usize()?;
    if d < 2 {
        return dline[1].err("d must be at least 2");
    }
    let mut chi: Vec<Option<Vec<C64>>> = vec![None; n];
    let mut ops: Vec<Option<Vec<C64>>> = vec![None; n];
    let mut gates = Vec::new();
    for line in &ls[2..] {
        match line[0].text {
            "chi" => {
                arity(line, d + 2, d + 2)?;
                let q = check_vertex(&line[1], n)?;
                let p: Vec<f64> = line[2..].iter().map(Tok::f64).collect::<Result<_>>()?;
                if let Some(i) = p.iter().position(|&x| x < 0.0) {
                    return line[2 + i].err("negative probability");
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return line[2].err(format!("diagonal sums to {total}, not 1"));
                }
                let mut m = vec![c(0.0, 0.0); d * d];
                for (k, &x) in p.iter().enumerate() {
                    m[k * d + k] = c(x, 0.0);
                }
                chi[q] = Some(m);
            }
            "op" => {
                arity(line, d * d + 2, d * d + 2)?;
                let q = check_vertex(&line[1], n)?;
                ops[q] = Some(line[2..].iter().map(Tok::complex).collect::<Result<_>>()?);
            }
            "gate" => {
                let sep = match line.iter().position(|t| t.text == ":") {
                    Some(i) => i,
                    None => return line[0].err("expected ':' between support and entries"),
                };
                let support: Vec<usize> = line[1..sep].iter().map(|t| check_vertex(t, n)).collect::<Result<_>>()?;
                if support.is_empty() {
                    return line[0].err("empty gate support");
                }
                let diag: Vec<C64> = line[sep + 1..].iter().map(Tok::complex).collect::<Result<_>>()?;
                let want = d.pow(support.len() as u32);
                if diag.len() != want {
                    return line[sep].err(format!("expected {want} entries, found {}", diag.len()));
                }
                gates.push(DiagonalGate::new(support, diag, d).or_else(|e| line[0].err(e.to_string()))?);
            }
            other => return line[0].err(format!("unknown record '{other}'")),
        }
    }
    let uniform: Vec<C64> = (0..d * d).map(|i| if i % (d + 1) == 0 { c(1.0 / d as f64, 0.0) } else { c(0.0, 0.0) }).collect();
    let eye: Vec<C64> = (0..d * d).map(|i| if i % (d + 1) == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect();
    QuditSystem::new(
        d,
        chi.into_iter().map(|m| m.unwrap_or_else(|| uniform.clone())).collect(),
        gates,
        ops.into_iter().map(|m| m.unwrap_or_else(|| eye.clone())).collect(),
    )
}

/// `RxC` as in `4x4`.
pub fn parse_grid_dims(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::InvalidArgument(format!("grid '{s}' is not of the form RxC")))?;
    let p = |t: &str| t.trim().parse::<usize>().ok().filter(|&v| v > 0);
    p(r).zip(p(c)).ok_or_else(|| Error::InvalidArgument(format!("grid '{s}' needs positive sizes")))
}
