use super::{Letter, Word};
use crate::error::{format_err, Result};

/// Tokenizes a word over `names`. Names are matched greedily (longest first),
/// so `ab` parses as `a b` whenever no generator is literally named `ab`.
/// Separators: whitespace, `*` and `.`. `x'` and `x^-1` are inverses,
/// `(u)^k` repeats a group, `1` is the identity.
pub fn parse_letters(names: &[String], s: &str) -> Result<Vec<Letter>> {
    let chars: Vec<char> = s.chars().collect();
    let mut pos = 0;
    let out = parse_seq(names, &chars, &mut pos, 0)?;
    if pos != chars.len() {
        return format_err(format!("unexpected {:?} in word {s:?}", chars[pos]));
    }
    Ok(out)
}

fn parse_seq(names: &[String], c: &[char], pos: &mut usize, depth: usize) -> Result<Vec<Letter>> {
    let mut out = Vec::new();
    loop {
        while *pos < c.len() && (c[*pos].is_whitespace() || c[*pos] == '*' || c[*pos] == '.') {
            *pos += 1;
        }
        if *pos >= c.len() {
            if depth > 0 {
                return format_err("unbalanced parenthesis");
            }
            return Ok(out);
        }
        let atom: Vec<Letter> = match c[*pos] {
            ')' => {
                if depth == 0 {
                    return format_err("unbalanced parenthesis");
                }
                return Ok(out);
            }
            '(' => {
                *pos += 1;
                let inner = parse_seq(names, c, pos, depth + 1)?;
                *pos += 1; // ')'
                inner
            }
            '1' if !c.get(*pos + 1).is_some_and(|x| x.is_ascii_digit()) => {
                *pos += 1;
                Vec::new()
            }
            _ => {
                let rest: String = c[*pos..].iter().collect();
                let best = names
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| rest.starts_with(n.as_str()))
                    .max_by_key(|(_, n)| n.len());
                match best {
                    Some((g, n)) => {
                        *pos += n.chars().count();
                        vec![Letter::pos(g)]
                    }
                    None => {
                        let tok: String = rest.chars().take_while(|x| x.is_alphanumeric()).collect();
                        return format_err(format!("unknown generator {:?}", if tok.is_empty() { rest } else { tok }));
                    }
                }
            }
        };
        let mut exp: i64 = 1;
        loop {
            if *pos < c.len() && c[*pos] == '\'' {
                exp = -exp;
                *pos += 1;
            } else if *pos < c.len() && c[*pos] == '^' {
                *pos += 1;
                let start = *pos;
                if *pos < c.len() && (c[*pos] == '-' || c[*pos] == '+') {
                    *pos += 1;
                }
                while *pos < c.len() && c[*pos].is_ascii_digit() {
                    *pos += 1;
                }
                let t: String = c[start..*pos].iter().collect();
                let k: i64 = t.parse().map_err(|_| crate::Error::Format(format!("bad exponent {t:?}")))?;
                exp *= k;
            } else {
                break;
            }
        }
        let inv: Vec<Letter> = atom.iter().rev().map(|l| l.inverse()).collect();
        for _ in 0..exp.unsigned_abs() {
            out.extend_from_slice(if exp < 0 { &inv } else { &atom });
        }
    }
}

/// Renders a word with generator names; names are separated by spaces unless
/// every name is a single character.
pub fn write_word(names: &[String], w: &Word) -> String {
    if w.is_identity() {
        return "1".to_string();
    }
    let compact = names.iter().all(|n| n.chars().count() == 1);
    let toks: Vec<String> = w
        .letters()
        .iter()
        .map(|l| {
            let n = names.get(l.gen).cloned().unwrap_or_else(|| format!("x{}", l.gen));
            if l.inv {
                format!("{n}'")
            } else {
                n
            }
        })
        .collect();
    toks.join(if compact { "" } else { " " })
}
