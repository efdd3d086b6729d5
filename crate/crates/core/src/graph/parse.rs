//! Edge-list text format.
//!
//! ```text
//! # comment
//! n 3          node count, first non-comment line
//! t 2          target-set member
//! o 0 1        obligatory arc
//! p 1 0        prohibited arc
//! f 2 0        facultative arc (file order = weight order)
//! ```
//!
//! Weight vectors are written as `<src> <dst> <weight>` lines in
//! facultative order.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use super::{LinkGraph, Link, WeightVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept self links on controlled pages.
    pub allow_self_loops: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Obligatory,
    Prohibited,
    Facultative,
}

fn content(line: &str) -> &str {
    match line.find('#') {
        Some(k) => line[..k].trim(),
        None => line.trim(),
    }
}

fn parse_index(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} '{tok}'"),
    })
}

pub fn parse_graph(text: &str, opts: ParseOptions) -> Result<LinkGraph> {
    let mut n: Option<usize> = None;
    let mut classes: HashMap<Link, Class> = HashMap::new();
    let mut obligatory = Vec::new();
    let mut prohibited = Vec::new();
    let mut facultative = Vec::new();
    let mut targets = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let head = toks.next().unwrap_or_default();
        let Some(count) = n else {
            if head != "n" {
                return Err(Error::Parse {
                    line,
                    msg: "expected 'n <count>' header".into(),
                });
            }
            n = Some(parse_index(toks.next(), line, "node count")?);
            if toks.next().is_some() {
                return Err(Error::Parse { line, msg: "trailing tokens".into() });
            }
            continue;
        };
        let class = match head {
            "o" => Class::Obligatory,
            "p" => Class::Prohibited,
            "f" => Class::Facultative,
            "t" => {
                let t = parse_index(toks.next(), line, "target node")?;
                if t >= count {
                    return Err(Error::IndexOutOfRange { index: t, n: count });
                }
                if toks.next().is_some() {
                    return Err(Error::Parse { line, msg: "trailing tokens".into() });
                }
                targets.push(t);
                continue;
            }
            "n" => {
                return Err(Error::Parse {
                    line,
                    msg: "duplicate node count".into(),
                })
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown record '{other}'"),
                })
            }
        };
        let i = parse_index(toks.next(), line, "source")?;
        let j = parse_index(toks.next(), line, "destination")?;
        if toks.next().is_some() {
            return Err(Error::Parse { line, msg: "trailing tokens".into() });
        }
        for index in [i, j] {
            if index >= count {
                return Err(Error::IndexOutOfRange { index, n: count });
            }
        }
        match classes.get(&(i, j)) {
            Some(&c) if c == class => continue,
            Some(_) => return Err(Error::ArcConflict(i, j)),
            None => {
                classes.insert((i, j), class);
            }
        }
        match class {
            Class::Obligatory => obligatory.push((i, j)),
            Class::Prohibited => prohibited.push((i, j)),
            Class::Facultative => facultative.push((i, j)),
        }
    }
    let n = n.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        msg: "missing 'n <count>' header".into(),
    })?;
    LinkGraph::new(n, obligatory, prohibited, facultative, targets, opts.allow_self_loops)
}

pub fn serialize_graph(g: &LinkGraph) -> String {
    let mut s = String::new();
    writeln!(s, "n {}", g.n()).unwrap();
    for t in g.targets() {
        writeln!(s, "t {t}").unwrap();
    }
    for (i, j) in g.obligatory() {
        writeln!(s, "o {i} {j}").unwrap();
    }
    for (i, j) in g.prohibited() {
        writeln!(s, "p {i} {j}").unwrap();
    }
    for (i, j) in g.facultative() {
        writeln!(s, "f {i} {j}").unwrap();
    }
    s
}

pub fn serialize_weights(g: &LinkGraph, x: &WeightVector) -> String {
    let mut s = String::new();
    for (&(i, j), w) in g.facultative().iter().zip(x.as_slice()) {
        writeln!(s, "{i} {j} {w}").unwrap();
    }
    s
}

/// Reads a weight file. Every facultative arc must appear exactly once;
/// lines may come in any order.
pub fn parse_weights(g: &LinkGraph, text: &str) -> Result<WeightVector> {
    let index = g.facultative_index();
    let mut x = vec![f64::NAN; g.facultative().len()];
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let i = parse_index(toks.next(), line, "source")?;
        let j = parse_index(toks.next(), line, "destination")?;
        let w: f64 = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse { line, msg: "missing or invalid weight".into() })?;
        if toks.next().is_some() {
            return Err(Error::Parse { line, msg: "trailing tokens".into() });
        }
        let Some(&slot) = index.get(&(i, j)) else {
            return Err(Error::Parse {
                line,
                msg: format!("({i}, {j}) is not a facultative arc"),
            });
        };
        if !x[slot].is_nan() {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate weight for ({i}, {j})"),
            });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Parse {
                line,
                msg: format!("weight {w} outside [0, 1]"),
            });
        }
        x[slot] = w;
    }
    if let Some(k) = x.iter().position(|v| v.is_nan()) {
        let (i, j) = g.facultative()[k];
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("no weight for facultative arc ({i}, {j})"),
        });
    }
    WeightVector::new(x)
}

/// Reads `<index> <name>` lines. Unlisted nodes are named by their index.
pub fn parse_labels(n: usize, text: &str) -> Result<Vec<String>> {
    let mut names = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let (idx, name) = body.split_once(char::is_whitespace).ok_or(Error::Parse {
            line,
            msg: "expected '<index> <name>'".into(),
        })?;
        let i = parse_index(Some(idx), line, "node index")?;
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        names.insert(i, name.trim().to_string());
    }
    Ok((0..n).map(|i| names.remove(&i).unwrap_or_else(|| i.to_string())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_graph() {
        let g = parse_graph("n 2\no 0 1\nf 1 0", ParseOptions::default()).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.obligatory().iter().copied().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(g.facultative(), &[(1, 0)]);
        assert!(g.prohibited().is_empty());
    }

    #[test]
    fn arc_in_two_classes() {
        let err = parse_graph("n 2\no 0 1\np 0 1", ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ArcConflict(0, 1)));
    }

    #[test]
    fn duplicates_collapse_and_comments_skip() {
        let text = "# header\n\nn 3 # three nodes\nf 0 1\nf 0 1\no 1 2\no 1 2\nt 2\n";
        let g = parse_graph(text, ParseOptions::default()).unwrap();
        assert_eq!(g.facultative(), &[(0, 1)]);
        assert_eq!(g.obligatory().len(), 1);
        assert_eq!(g.targets().iter().copied().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_graph("n 2\no 0\n", ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_graph("o 0 1\n", ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_graph("n 2\nx 0 1\n", ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_graph("n 2\no 0 7\n", ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 7, n: 2 }));
    }

    #[test]
    fn self_loop_flag() {
        let text = "n 2\nf 0 0\nf 0 1\n";
        assert!(parse_graph(text, ParseOptions::default()).is_err());
        assert!(parse_graph(text, ParseOptions { allow_self_loops: true }).is_ok());
    }

    #[test]
    fn example_site_has_three_controlled_pages() {
        let g = parse_graph(include_str!("../../data/small_site.txt"), ParseOptions::default()).unwrap();
        assert_eq!(g.n(), 21);
        assert_eq!(g.controlled_pages(), vec![16, 19, 20]);
        assert_eq!(g.targets().len(), 3);
        assert_eq!(g.obligatory().len(), 41);
        assert_eq!(g.facultative().len(), 54);
    }

    #[test]
    fn weights_roundtrip() {
        let g = parse_graph("n 3\nf 0 1\nf 0 2\no 1 2\n", ParseOptions::default()).unwrap();
        let x = WeightVector::new(vec![0.18, 1.0]).unwrap();
        let text = serialize_weights(&g, &x);
        assert_eq!(text, "0 1 0.18\n0 2 1\n");
        assert_eq!(parse_weights(&g, &text).unwrap(), x);
        assert!(parse_weights(&g, "0 1 0.5\n").is_err());
        assert!(parse_weights(&g, "0 1 0.5\n0 2 1.5\n").is_err());
        assert!(parse_weights(&g, "0 1 0.5\n1 2 1\n").is_err());
    }

    #[test]
    fn labels_default_to_indices() {
        let l = parse_labels(3, "1 home page\n").unwrap();
        assert_eq!(l, vec!["0", "home page", "2"]);
    }
}
