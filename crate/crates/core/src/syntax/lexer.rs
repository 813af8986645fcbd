use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Unquoted or quoted atom name.
    Name(String),
    /// A quoted atom; never treated as an operator.
    Quoted(String),
    Var(String),
    Int(String),
    Str(String),
    /// `(` directly after a name, opening an argument list.
    OpenCall,
    Open,
    Close,
    OpenList,
    CloseList,
    Bar,
    Comma,
    End,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOL: &str = "+-*/\\^<>=~:.?@#&$";

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut spaced = true;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            spaced = true;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            spaced = true;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            bump!();
            bump!();
            loop {
                if i + 1 >= chars.len() {
                    return Err(SyntaxError::new(l0, c0, "unterminated block comment"));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            spaced = true;
            continue;
        }

        let (tl, tc) = (line, col);
        let prev_name = matches!(
            out.last(),
            Some(Token { tok: Tok::Name(_) | Tok::Quoted(_), .. })
        );
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            Tok::Int(chars[start..i].iter().collect())
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            if c.is_uppercase() || c == '_' {
                Tok::Var(word)
            } else {
                Tok::Name(word)
            }
        } else if c == '\'' || c == '"' {
            let quote = c;
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(SyntaxError::new(tl, tc, "unterminated quoted item"));
                }
                let d = chars[i];
                if d == quote {
                    if chars.get(i + 1) == Some(&quote) {
                        s.push(quote);
                        bump!();
                        bump!();
                        continue;
                    }
                    bump!();
                    break;
                }
                if d == '\\' && i + 1 < chars.len() {
                    bump!();
                    let e = chars[i];
                    s.push(match e {
                        'n' => '\n',
                        't' => '\t',
                        other => other,
                    });
                    bump!();
                    continue;
                }
                s.push(d);
                bump!();
            }
            if quote == '"' {
                Tok::Str(s)
            } else {
                Tok::Quoted(s)
            }
        } else if c == '(' {
            bump!();
            if prev_name && !spaced {
                Tok::OpenCall
            } else {
                Tok::Open
            }
        } else if c == ')' {
            bump!();
            Tok::Close
        } else if c == '[' {
            bump!();
            if chars.get(i) == Some(&']') {
                bump!();
                Tok::Name("[]".into())
            } else {
                Tok::OpenList
            }
        } else if c == ']' {
            bump!();
            Tok::CloseList
        } else if c == '|' {
            bump!();
            Tok::Bar
        } else if c == ',' {
            bump!();
            Tok::Comma
        } else if c == ';' || c == '!' {
            bump!();
            Tok::Name(c.to_string())
        } else if c == '.'
            && chars.get(i + 1).is_none_or(|n| n.is_whitespace() || *n == '%')
        {
            bump!();
            Tok::End
        } else if SYMBOL.contains(c) {
            let start = i;
            while i < chars.len() && SYMBOL.contains(chars[i]) {
                // stop before an end-of-clause dot
                if chars[i] == '.'
                    && i > start
                    && chars.get(i + 1).is_none_or(|n| n.is_whitespace() || *n == '%')
                {
                    break;
                }
                bump!();
            }
            Tok::Name(chars[start..i].iter().collect())
        } else {
            return Err(SyntaxError::new(tl, tc, format!("unexpected character {:?}", c)));
        };
        out.push(Token { tok, line: tl, col: tc });
        spaced = false;
    }
    Ok(out)
}
