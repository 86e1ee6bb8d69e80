//! Line-oriented sequence-definition files.
//!
//! ```text
//! # comment
//! [sequence fibonacci]
//! order = 2
//! coeffs = 1 1        # a_0 .. a_{d-1}
//! inhom = 0
//! initial = 1 1
//!
//! [chain fib2]
//! levels = fibonacci fibonacci
//!
//! [poly golden]
//! coeffs = 1 -1 -1    # X^2 - X - 1, leading coefficient first
//! irreducible = true
//! ```
//!
//! The full grammar is in `docs/formats.md`.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ilrs::{validate_ilrs, CompositionChain, IlrsSpec, RawIlrs};
use crate::trace::MinPoly;

/// Named sequences, chains and polynomials. Built-in names are always
/// present; definitions in a file shadow them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceFile {
    pub sequences: BTreeMap<String, IlrsSpec>,
    pub chains: BTreeMap<String, CompositionChain>,
    pub polys: BTreeMap<String, MinPoly>,
}

impl Default for SequenceFile {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Sequence,
    Chain,
    Poly,
}

#[derive(Debug)]
struct Section {
    kind: Kind,
    name: Option<String>,
    header_line: usize,
    keys: BTreeMap<String, (usize, String)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn ints(line: usize, key: &str, value: &str) -> Result<Vec<BigInt>> {
    value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<BigInt>()
                .map_err(|_| parse_err(line, format!("{key}: '{t}' is not an integer")))
        })
        .collect()
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

/// Polynomial coefficients, leading first; the leading one must be 1.
pub fn parse_poly_coeffs(text: &str, irreducible: bool) -> Result<MinPoly> {
    let c = ints(0, "coeffs", text).map_err(|_| Error::Invalid(format!("bad coefficient list '{text}'")))?;
    poly_from_descending(&c, irreducible).map_err(Error::Invalid)
}

fn poly_from_descending(c: &[BigInt], irreducible: bool) -> std::result::Result<MinPoly, String> {
    if c.len() < 2 {
        return Err("a polynomial needs degree at least 1".into());
    }
    if !c[0].is_one() {
        return Err(format!("leading coefficient must be 1, found {}", c[0]));
    }
    // X^d + c_1 X^{d-1} + … + c_d  =  X^d − a_{d−1}X^{d−1} − … − a_0.
    let a: Vec<BigInt> = c[1..].iter().rev().map(|x| -x).collect();
    if a[0].is_zero() {
        return Err("constant term must be nonzero".into());
    }
    MinPoly::new(a, irreducible).map_err(|e| e.to_string())
}

impl SequenceFile {
    pub fn builtin() -> Self {
        let sequences = [IlrsSpec::fibonacci(), IlrsSpec::lucas(), IlrsSpec::doubling()]
            .into_iter()
            .map(|s| (s.name().expect("named").to_string(), s))
            .collect();
        let polys = [("golden".to_string(), MinPoly::golden())].into_iter().collect();
        SequenceFile {
            sequences,
            chains: BTreeMap::new(),
            polys,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(inner) = body.strip_prefix('[') {
                let inner = inner
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, "section header must end with ']'"))?;
                let mut parts = inner.split_whitespace();
                let kind = match parts.next() {
                    Some("sequence") => Kind::Sequence,
                    Some("chain") => Kind::Chain,
                    Some("poly") => Kind::Poly,
                    other => {
                        return Err(parse_err(
                            line,
                            format!("unknown section '{}', expected sequence, chain or poly", other.unwrap_or("")),
                        ))
                    }
                };
                let name = parts.next().map(str::to_string);
                if parts.next().is_some() {
                    return Err(parse_err(line, "section header takes at most one name"));
                }
                sections.push(Section {
                    kind,
                    name,
                    header_line: line,
                    keys: BTreeMap::new(),
                });
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| parse_err(line, "expected 'key = value'"))?;
            let key = key.trim().to_string();
            let section = sections
                .last_mut()
                .ok_or_else(|| parse_err(line, "assignment outside a section"))?;
            if section.keys.insert(key.clone(), (line, value.trim().to_string())).is_some() {
                return Err(parse_err(line, format!("duplicate key '{key}'")));
            }
        }

        let mut out = Self::builtin();
        let mut defined = std::collections::BTreeSet::new();
        let mut pending_chains = Vec::new();
        for mut s in sections {
            let line = s.header_line;
            if let Some((l, v)) = s.keys.remove("name") {
                match &s.name {
                    Some(n) if *n != v => {
                        return Err(parse_err(l, format!("name '{v}' differs from the header name '{n}'")))
                    }
                    _ => s.name = Some(v),
                }
            }
            let name = s.name.clone().ok_or_else(|| parse_err(line, "section has no name"))?;
            if !valid_name(&name) {
                return Err(parse_err(line, format!("invalid name '{name}'")));
            }
            if !defined.insert(name.clone()) {
                return Err(parse_err(line, format!("'{name}' is defined twice")));
            }
            let allowed: &[&str] = match s.kind {
                Kind::Sequence => &["order", "coeffs", "inhom", "initial"],
                Kind::Chain => &["levels"],
                Kind::Poly => &["coeffs", "irreducible"],
            };
            if let Some((k, (l, _))) = s.keys.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
                return Err(parse_err(*l, format!("unknown key '{k}', expected one of {allowed:?}")));
            }
            let need = |k: &str| {
                s.keys
                    .get(k)
                    .cloned()
                    .ok_or_else(|| parse_err(line, format!("'{name}' is missing '{k}'")))
            };
            match s.kind {
                Kind::Sequence => {
                    let (cl, cv) = need("coeffs")?;
                    let coeffs = ints(cl, "coeffs", &cv)?;
                    let (il, iv) = need("initial")?;
                    let initial = ints(il, "initial", &iv)?;
                    let inhom = match s.keys.get("inhom") {
                        Some((l, v)) => v
                            .parse::<BigInt>()
                            .map_err(|_| parse_err(*l, format!("inhom: '{v}' is not an integer")))?,
                        None => BigInt::zero(),
                    };
                    let order = match s.keys.get("order") {
                        Some((l, v)) => v
                            .parse::<usize>()
                            .map_err(|_| parse_err(*l, format!("order: '{v}' is not a positive integer")))?,
                        None => coeffs.len(),
                    };
                    let raw = RawIlrs {
                        order,
                        coeffs,
                        inhom,
                        initial,
                        name: Some(name.clone()),
                    };
                    let spec = validate_ilrs(raw).map_err(|e| parse_err(line, format!("'{name}': {e}")))?;
                    out.sequences.insert(name, spec);
                }
                Kind::Chain => {
                    let (l, v) = need("levels")?;
                    let refs: Vec<String> = v
                        .split(|c: char| c.is_whitespace() || c == ',')
                        .filter(|t| !t.is_empty())
                        .map(str::to_string)
                        .collect();
                    pending_chains.push((name, l, refs));
                }
                Kind::Poly => {
                    let (l, v) = need("coeffs")?;
                    let c = ints(l, "coeffs", &v)?;
                    let irreducible = match s.keys.get("irreducible") {
                        Some((_, v)) if v == "true" => true,
                        Some((_, v)) if v == "false" => false,
                        Some((l, v)) => return Err(parse_err(*l, format!("irreducible: expected true or false, found '{v}'"))),
                        None => false,
                    };
                    let p = poly_from_descending(&c, irreducible).map_err(|m| parse_err(l, m))?;
                    out.polys.insert(name, p);
                }
            }
        }
        for (name, line, refs) in pending_chains {
            let levels = refs
                .iter()
                .map(|r| {
                    out.sequences
                        .get(r)
                        .cloned()
                        .ok_or_else(|| parse_err(line, format!("chain '{name}' refers to unknown sequence '{r}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            let chain = CompositionChain::new(levels).map_err(|e| parse_err(line, format!("chain '{name}': {e}")))?;
            out.chains.insert(name, chain);
        }
        Ok(out)
    }

    pub fn sequence(&self, name: &str) -> Result<&IlrsSpec> {
        self.sequences
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// A chain name, or sequence names separated by commas, outer first.
    pub fn chain(&self, expr: &str) -> Result<CompositionChain> {
        if let Some(c) = self.chains.get(expr) {
            return Ok(c.clone());
        }
        let levels = expr
            .split(',')
            .map(|n| self.sequence(n.trim()).cloned())
            .collect::<Result<Vec<_>>>()?;
        CompositionChain::new(levels)
    }

    /// A polynomial name, or a coefficient list such as `1,-1,-1`.
    pub fn poly(&self, expr: &str) -> Result<MinPoly> {
        if let Some(p) = self.polys.get(expr) {
            return Ok(p.clone());
        }
        if expr.chars().any(|c| c.is_ascii_digit()) {
            return parse_poly_coeffs(expr, false);
        }
        Err(Error::UnknownName(expr.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sample
[sequence pell]
order = 2
coeffs = 1 2
initial = 1 2

[chain pf]
levels = pell, fibonacci

[poly salem4]
coeffs = 1 -1 -1 -1 1   # X^4 - X^3 - X^2 - X + 1
irreducible = true
";

    #[test]
    fn parses_sample() {
        let f = SequenceFile::parse(SAMPLE).unwrap();
        let pell = f.sequence("pell").unwrap();
        assert_eq!(pell.coeffs(), &[1.into(), 2.into()]);
        assert_eq!(f.chains["pf"].levels().len(), 2);
        let p = &f.polys["salem4"];
        assert_eq!(p.to_string(), "X^4 - X^3 - X^2 - X + 1");
        assert!(p.irreducible_asserted());
        assert_eq!(f.chain("fibonacci,fibonacci").unwrap().depth(), 1);
        assert_eq!(f.poly("1,-1,-1").unwrap().coeffs(), MinPoly::golden().coeffs());
    }

    #[test]
    fn diagnostics_carry_lines() {
        let cases = [
            ("[sequence a]\ncoeffs = 1 x\ninitial = 1 1\n", 2),
            ("[sequence a]\ncoeffs = 1 1\n", 1),
            ("coeffs = 1\n", 1),
            ("[sequence a]\ncoeffs = 1 1\ninitial = 1 1\ncolour = red\n", 4),
            ("\n\n[chain c]\nlevels = nope\n", 4),
            ("[sequence a]\ncoeffs = 1\ncoeffs = 2\n", 3),
            ("[poly p]\ncoeffs = 2 1\n", 2),
            ("[widget w]\n", 1),
        ];
        for (text, line) in cases {
            match SequenceFile::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn non_reversible_inner_level_rejected() {
        let text = "[chain bad]\nlevels = fibonacci doubling\n";
        assert!(matches!(SequenceFile::parse(text), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn shipped_sample_parses() {
        let f = SequenceFile::parse(include_str!("../../../../docs/sequences.txt")).unwrap();
        assert_eq!(f.sequence("fibonacci").unwrap().key(), IlrsSpec::fibonacci().key());
        assert_eq!(f.sequence("mersenne").unwrap().inhom(), &BigInt::from(1));
        assert_eq!(f.chains.len(), 3);
        assert!(f.polys["golden"].irreducible_asserted());
    }
}
