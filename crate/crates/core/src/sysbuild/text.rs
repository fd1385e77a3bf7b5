//! The `dio v1` text format.
//!
//! ```text
//! dio v1
//! meta n=1 nprime=1 r=0 rprime=0 d=0 s=0 good=1
//! var x
//! poly Beq: x^2 - 2
//! ```

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::poly::{Monomial, Poly};
use super::{DiophantineSystem, Meta, SysError, Tag, TaggedPoly};

pub fn serialize_system(system: &DiophantineSystem) -> String {
    let m = &system.meta;
    let mut out = String::from("dio v1\n");
    writeln!(
        out,
        "meta n={} nprime={} r={} rprime={} d={} s={} good={}",
        m.n,
        m.nprime,
        m.r,
        m.rprime,
        m.d,
        m.s,
        u8::from(m.good)
    )
    .expect("string write");
    for v in &system.variables {
        writeln!(out, "var {v}").expect("string write");
    }
    for tp in &system.polys {
        writeln!(out, "poly {}: {}", tp.tag, format_poly(&tp.poly, &system.variables)).expect("string write");
    }
    out
}

pub fn format_poly(p: &Poly, names: &[String]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (mono, c)) in p.terms().iter().enumerate() {
        let negative = c.is_negative();
        match (k, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let a = c.abs();
        let mut factors: Vec<String> = Vec::new();
        if !a.is_one() || mono.is_one() {
            factors.push(a.to_string());
        }
        for &(v, e) in mono.powers() {
            let name = &names[v as usize];
            factors.push(if e == 1 { name.clone() } else { format!("{name}^{e}") });
        }
        out.push_str(&factors.join("*"));
    }
    out
}

fn err(line: usize, column: usize, message: impl Into<String>) -> SysError {
    SysError::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_system(text: &str) -> Result<DiophantineSystem, SysError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim_end() == "dio v1" => {}
        Some((n, _)) => return Err(err(n, 1, "expected header `dio v1`")),
        None => return Err(err(1, 1, "empty document")),
    }
    let mut meta: Option<Meta> = None;
    let mut system = DiophantineSystem::default();
    for (ln, raw) in lines {
        let line = raw.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("meta ") {
            meta = Some(parse_meta(rest, ln)?);
        } else if let Some(name) = line.strip_prefix("var ") {
            let name = name.trim();
            if !is_name(name) {
                return Err(err(ln, 5, format!("invalid variable name `{name}`")));
            }
            if system.variable_index(name).is_some() {
                return Err(err(ln, 5, format!("duplicate variable `{name}`")));
            }
            system.variables.push(name.to_string());
        } else if let Some(rest) = line.strip_prefix("poly ") {
            let colon = rest
                .find(':')
                .ok_or_else(|| err(ln, 6, "expected `<tag>:` after `poly`"))?;
            let tag = Tag::parse(rest[..colon].trim())
                .ok_or_else(|| err(ln, 6, format!("unknown tag `{}`", rest[..colon].trim())))?;
            let offset = "poly ".len() + colon + 1;
            let poly = PolyParser {
                src: &rest[colon + 1..],
                pos: 0,
                line: ln,
                offset,
                names: &system.variables,
            }
            .parse()?;
            system.polys.push(TaggedPoly { tag, poly });
        } else {
            return Err(err(ln, 1, "expected `meta`, `var` or `poly`"));
        }
    }
    system.meta = meta.ok_or_else(|| err(2, 1, "missing `meta` line"))?;
    Ok(system)
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_meta(rest: &str, ln: usize) -> Result<Meta, SysError> {
    let mut meta = Meta::default();
    let mut seen = Vec::new();
    let mut col = "meta ".len() + 1;
    for field in rest.split(' ') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(ln, col, format!("expected key=value, got `{field}`")))?;
        let v: usize = value
            .parse()
            .map_err(|_| err(ln, col + key.len() + 1, format!("invalid integer `{value}`")))?;
        match key {
            "n" => meta.n = v,
            "nprime" => meta.nprime = v,
            "r" => meta.r = v,
            "rprime" => meta.rprime = v,
            "d" => meta.d = v,
            "s" => meta.s = v,
            "good" if v <= 1 => meta.good = v == 1,
            "good" => return Err(err(ln, col + 5, "good must be 0 or 1")),
            _ => return Err(err(ln, col, format!("unknown meta key `{key}`"))),
        }
        seen.push(key);
        col += field.len() + 1;
    }
    for key in ["n", "nprime", "r", "rprime", "d", "s", "good"] {
        if !seen.contains(&key) {
            return Err(err(ln, 1, format!("missing meta key `{key}`")));
        }
    }
    Ok(meta)
}

struct PolyParser<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    offset: usize,
    names: &'a [String],
}

impl PolyParser<'_> {
    fn column(&self) -> usize {
        self.offset + self.pos + 1
    }

    fn fail(&self, message: impl Into<String>) -> SysError {
        err(self.line, self.column(), message)
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(' ') {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn parse(mut self) -> Result<Poly, SysError> {
        let mut terms: Vec<(Monomial, BigInt)> = Vec::new();
        self.skip_ws();
        let mut sign = BigInt::one();
        if self.peek() == Some('-') {
            sign = -sign;
            self.pos += 1;
            self.skip_ws();
        }
        loop {
            let (m, c) = self.term()?;
            terms.push((m, c * &sign));
            self.skip_ws();
            match self.peek() {
                None => break,
                Some('+') => sign = BigInt::one(),
                Some('-') => sign = -BigInt::one(),
                Some(c) => return Err(self.fail(format!("unexpected `{c}`"))),
            }
            self.pos += 1;
            self.skip_ws();
        }
        Ok(Poly::from_terms(terms))
    }

    fn term(&mut self) -> Result<(Monomial, BigInt), SysError> {
        let mut coeff = BigInt::one();
        let mut powers: Vec<(u32, u32)> = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_digit() => coeff *= self.integer()?,
                Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                    let start = self.pos;
                    let name_len = self.src[start..]
                        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                        .unwrap_or(self.src.len() - start);
                    let name = &self.src[start..start + name_len];
                    let var = self
                        .names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| self.fail(format!("undeclared variable `{name}`")))?;
                    self.pos += name_len;
                    let mut exp = 1u32;
                    if self.peek() == Some('^') {
                        self.pos += 1;
                        let e = self.integer()?;
                        exp = u32::try_from(e).map_err(|_| self.fail("exponent too large"))?;
                    }
                    powers.push((var as u32, exp));
                }
                Some(c) => return Err(self.fail(format!("expected a number or variable, found `{c}`"))),
                None => return Err(self.fail("unexpected end of polynomial")),
            }
            self.skip_ws();
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if coeff.is_zero() {
            powers.clear();
        }
        Ok((Monomial::from_powers(powers), coeff))
    }

    fn integer(&mut self) -> Result<BigInt, SysError> {
        let len = self.src[self.pos..]
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.src.len() - self.pos);
        if len == 0 {
            return Err(self.fail("expected an integer"));
        }
        let v = self.src[self.pos..self.pos + len].parse().expect("digits parse");
        self.pos += len;
        Ok(v)
    }
}
