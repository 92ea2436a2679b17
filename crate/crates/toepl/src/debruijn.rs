//! de Bruijn (Rauzy) graphs of the language at a fixed word length.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::LanguageIndex;
use crate::words::{is_palindrome, set_contains, Alphabet, CodingSpec, Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeBruijnGraph {
    pub l: usize,
    /// Sorted lexicographically by letter ids.
    pub vertices: Vec<Word>,
    /// `(from, to, label)`, sorted.
    pub edges: Vec<(usize, usize, Letter)>,
}

pub fn build_graph(index: &LanguageIndex, l: usize) -> Result<DeBruijnGraph> {
    if l + 1 > index.max_valid_l {
        return Err(Error::Range(format!(
            "L + 1 = {} exceeds max_valid_L = {}",
            l + 1,
            index.max_valid_l
        )));
    }
    let vertices = index.words(l)?;
    let pos: HashMap<&[Letter], usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_slice(), i))
        .collect();
    let mut edges: Vec<(usize, usize, Letter)> = index
        .words(l + 1)?
        .iter()
        .map(|w| (pos[&w[..l]], pos[&w[1..]], w[l]))
        .collect();
    edges.sort_unstable();
    Ok(DeBruijnGraph { l, vertices, edges })
}

/// Path between kept vertices (those not of in/out degree `(1,1)`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub edges: u64,
    /// Word spelled along the arc: the start vertex followed by the edge labels.
    pub word: Word,
}

impl Arc {
    pub fn self_reverse(&self) -> bool {
        is_palindrome(&self.word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    /// Out-degree at least 2.
    pub branch_vertices: Vec<usize>,
    /// In-degree at least 2.
    pub merge_vertices: Vec<usize>,
    pub arcs: Vec<Arc>,
    pub loops: usize,
    pub palindromic_vertices: usize,
}

impl GraphStats {
    /// Reversal maps the multiset of arc words onto itself.
    pub fn arcs_reversal_closed(&self) -> bool {
        let mut words: Vec<&Word> = self.arcs.iter().map(|a| &a.word).collect();
        let mut reversed: Vec<Word> = self
            .arcs
            .iter()
            .map(|a| a.word.iter().rev().copied().collect())
            .collect();
        words.sort();
        reversed.sort();
        words.into_iter().eq(reversed.iter())
    }

    /// Self-reverse arcs with an even number of edges, zero-length arcs included.
    /// Each has a palindromic middle vertex, so this is the palindrome count at `L`.
    pub fn even_arcs(&self) -> usize {
        self.arcs
            .iter()
            .filter(|a| a.edges % 2 == 0 && a.self_reverse())
            .count()
    }

    /// Self-reverse arcs with an odd number of edges; their middle edges are the
    /// palindromes of length `L + 1`.
    pub fn odd_arcs(&self) -> usize {
        self.arcs
            .iter()
            .filter(|a| a.edges % 2 == 1 && a.self_reverse())
            .count()
    }
}

impl DeBruijnGraph {
    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for &(u, _, _) in &self.edges {
            d[u] += 1;
        }
        d
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for &(_, v, _) in &self.edges {
            d[v] += 1;
        }
        d
    }

    /// Vertex `u -> reverse(u)` with every edge reversed maps the graph onto itself.
    pub fn reversal_is_isomorphism(&self) -> bool {
        let pos: HashMap<&[Letter], usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_slice(), i))
            .collect();
        let mut rev = Vec::with_capacity(self.vertices.len());
        for w in &self.vertices {
            let r: Word = w.iter().rev().copied().collect();
            match pos.get(r.as_slice()) {
                Some(&i) => rev.push(i),
                None => return false,
            }
        }
        let pairs: BTreeSet<(usize, usize)> = self.edges.iter().map(|&(u, v, _)| (u, v)).collect();
        let mapped: BTreeSet<(usize, usize)> = pairs.iter().map(|&(u, v)| (rev[v], rev[u])).collect();
        pairs == mapped
    }

    pub fn strongly_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let reach = |forward: bool| {
            let mut adj = vec![Vec::new(); n];
            for &(u, v, _) in &self.edges {
                if forward {
                    adj[u].push(v)
                } else {
                    adj[v].push(u)
                }
            }
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    pub fn stats(&self) -> GraphStats {
        let outd = self.out_degrees();
        let ind = self.in_degrees();
        let n = self.vertices.len();
        let kept: Vec<bool> = (0..n).map(|i| !(outd[i] == 1 && ind[i] == 1)).collect();
        let mut out_edges: Vec<Vec<(usize, Letter)>> = vec![Vec::new(); n];
        for &(u, v, c) in &self.edges {
            out_edges[u].push((v, c));
        }
        let mut arcs = Vec::new();
        for u in 0..n {
            if !kept[u] {
                continue;
            }
            if outd[u] >= 2 && ind[u] >= 2 {
                arcs.push(Arc {
                    from: u,
                    to: u,
                    edges: 0,
                    word: self.vertices[u].clone(),
                });
            }
            for &(first, c) in &out_edges[u] {
                let mut spelled = self.vertices[u].clone();
                spelled.push(c);
                let mut v = first;
                let mut len = 1u64;
                while !kept[v] {
                    let (next, c) = out_edges[v][0];
                    spelled.push(c);
                    v = next;
                    len += 1;
                    if len as usize > self.edges.len() {
                        break;
                    }
                }
                arcs.push(Arc {
                    from: u,
                    to: v,
                    edges: len,
                    word: spelled,
                });
            }
        }
        GraphStats {
            vertices: n,
            edges: self.edges.len(),
            branch_vertices: (0..n).filter(|&i| outd[i] >= 2).collect(),
            merge_vertices: (0..n).filter(|&i| ind[i] >= 2).collect(),
            loops: self.edges.iter().filter(|&&(u, v, _)| u == v).count(),
            palindromic_vertices: self.vertices.iter().filter(|w| is_palindrome(w)).count(),
            arcs,
        }
    }

    pub fn to_dot(&self, alphabet: &Alphabet) -> String {
        let mut s = String::new();
        writeln!(s, "digraph debruijn_{} {{", self.l).unwrap();
        for (i, w) in self.vertices.iter().enumerate() {
            let label = if w.is_empty() {
                "ε".to_string()
            } else {
                alphabet.render(w)
            };
            writeln!(s, "  n{i} [label=\"{label}\"];").unwrap();
        }
        for &(u, v, c) in &self.edges {
            writeln!(s, "  n{u} -> n{v} [label=\"{}\"];", alphabet.name(c)).unwrap();
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> String {
        let twin = JsonGraph {
            l: self.l,
            alphabet: alphabet.names().to_vec(),
            vertices: self.vertices.iter().map(|w| alphabet.render(w)).collect(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v, c)| (u, v, alphabet.name(c).to_string()))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&twin).expect("graph serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<(DeBruijnGraph, Alphabet)> {
        let twin: JsonGraph =
            serde_json::from_str(text).map_err(|e| Error::Spec(format!("graph json: {e}")))?;
        let alphabet = Alphabet::new(twin.alphabet)?;
        let vertices = twin
            .vertices
            .iter()
            .map(|w| {
                if w == "ε" {
                    Ok(Vec::new())
                } else {
                    alphabet.parse_word(w)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = twin
            .edges
            .iter()
            .map(|(u, v, c)| {
                let c = alphabet
                    .id(c)
                    .ok_or_else(|| Error::Spec(format!("graph json: unknown label {c:?}")))?;
                Ok((*u, *v, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((
            DeBruijnGraph {
                l: twin.l,
                vertices,
                edges,
            },
            alphabet,
        ))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonGraph {
    #[serde(rename = "L")]
    l: usize,
    alphabet: Vec<String>,
    vertices: Vec<String>,
    edges: Vec<(usize, usize, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

pub fn export(g: &DeBruijnGraph, alphabet: &Alphabet, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::Dot => g.to_dot(alphabet),
        ExportFormat::Json => g.to_json(alphabet),
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn export_dot(g: &DeBruijnGraph, alphabet: &Alphabet, path: &Path) -> Result<()> {
    export(g, alphabet, ExportFormat::Dot, path)
}

/// Multiset of arc edge counts predicted for a simple Toeplitz subshift at length `l`
/// (zero-length arcs stand for bispecial vertices), sorted.
pub fn expected_arc_lengths(spec: &CodingSpec, l: u64) -> Result<Vec<u64>> {
    let len = |k: i64| -> Result<u64> {
        spec.block_len_u64(k)?
            .ok_or_else(|| Error::Range("block length exceeds 64 bits".into()))
    };
    let card = |s: u64| s.count_ones() as u64;
    let mut out = Vec::new();
    let p0 = len(0)?;
    if l <= p0 {
        let a0 = spec.alphabet_from(0);
        out.push(0);
        out.extend(std::iter::repeat_n(l + 1, (card(a0) - 1) as usize));
        if l < p0 || set_contains(spec.alphabet_from(1), spec.a_at(0)?) {
            out.push(1);
        }
        out.sort_unstable();
        return Ok(out);
    }
    let mut k = 1i64;
    while l > len(k)? {
        k += 1;
    }
    let (pk, p1, p2) = (len(k)?, len(k - 1)?, len(k - 2)?);
    let ku = k as usize;
    let a_k = spec.alphabet_from(ku);
    let a_kp1 = spec.alphabet_from(ku + 1);
    let r = l % (p1 + 1);
    let rt = l % (p2 + 1);
    let cur = spec.a_at(ku)?;
    let prev = spec.a_at(ku - 1)?;
    let ak_arc = l + 1 < pk - p1 + 1 || set_contains(a_kp1, cur);
    let two_branch = set_contains(a_k, prev) && l <= 2 * p1 - p2;
    if two_branch {
        out.extend(std::iter::repeat_n(l + 1, (card(a_k) - 2) as usize));
        if ak_arc {
            out.push(r + 1);
        }
        out.extend([r + 1, p2 - rt, rt + 1, r + 1, p1 - r]);
    } else {
        out.extend(std::iter::repeat_n(l + 1, (card(a_k) - 1) as usize));
        if ak_arc {
            out.push(r + 1);
        }
        out.push(p1 - r);
    }
    out.sort_unstable();
    Ok(out)
}
