use super::{
    Block, Config, DarkDecl, DiagKind, Diagnostic, Element, Kind, Network, Param, Port, PortRef,
    Setting, SettingValue, Spans, Value, Arm,
};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Colon,
    At,
    Arrow,
    Dot,
    Comma,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Newline,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let simple = match c {
                ':' => Some(Tok::Colon),
                '@' => Some(Tok::At),
                '.' if !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) => Some(Tok::Dot),
                ',' => Some(Tok::Comma),
                ';' => Some(Tok::Semi),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                '=' => Some(Tok::Eq),
                _ => None,
            };
            if let Some(tok) = simple {
                out.push(Token { tok, line, col });
                i += 1;
                continue;
            }
            if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push(Token { tok: Tok::Arrow, line, col });
                i += 2;
                continue;
            }
            if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' {
                let start = i;
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s.parse().map_err(|_| Diagnostic {
                    line,
                    col,
                    kind: DiagKind::Syntax,
                    message: format!("bad number `{s}`"),
                })?;
                out.push(Token { tok: Tok::Num(v), line, col });
                continue;
            }
            if is_ident_start(c) {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Ident(s), line, col });
                continue;
            }
            return Err(Diagnostic {
                line,
                col,
                kind: DiagKind::Syntax,
                message: format!("unexpected character `{c}`"),
            });
        }
        out.push(Token { tok: Tok::Newline, line, col: chars.len() + 1 });
    }
    let line = text.lines().count() + 1;
    out.push(Token { tok: Tok::Eof, line, col: 1 });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, t: &Token, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic { line: t.line, col: t.col, kind: DiagKind::Syntax, message: msg.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<Token> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            self.err(&t, format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            _ => self.err(&t, format!("expected {what}")),
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.next();
        }
    }

    fn end_of_statement(&mut self) -> PResult<()> {
        let t = self.next();
        match t.tok {
            Tok::Newline | Tok::Eof => Ok(()),
            _ => self.err(&t, "expected end of line"),
        }
    }

    fn value(&mut self) -> PResult<Value> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(Value::Lit(v)),
            Tok::Ident(s) => Ok(Value::Param(s)),
            _ => self.err(&t, "expected a number or parameter name"),
        }
    }

    fn port_ref(&mut self) -> PResult<PortRef> {
        let (elem, _) = self.ident("element name")?;
        self.expect(Tok::Dot, "`.` after element name")?;
        let (p, t) = self.ident("port name")?;
        let port = match p.as_str() {
            "a" => Port::A,
            "b" => Port::B,
            "c" => Port::C,
            "d" => Port::D,
            _ => {
                return Err(Diagnostic {
                    line: t.line,
                    col: t.col,
                    kind: DiagKind::UnknownPort,
                    message: format!("unknown port `{p}` (ports are a, b, c, d)"),
                })
            }
        };
        Ok(PortRef { elem, port })
    }

    fn site(&mut self) -> PResult<String> {
        let t = self.next();
        if t.tok != Tok::At {
            return self.err(&t, "expected `@ SITE`");
        }
        Ok(self.ident("site name")?.0)
    }

    fn kind(&mut self) -> PResult<Kind> {
        let (word, t) = self.ident("element kind")?;
        match word.as_str() {
            "source" => Ok(Kind::Source),
            "mirror" => Ok(Kind::Mirror),
            "detector" => Ok(Kind::Detector),
            "dump" => Ok(Kind::Dump),
            "phase" => {
                self.expect(Tok::LParen, "`(`")?;
                let v = self.value()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Kind::Phase(v))
            }
            "shutter" => {
                let mut opacity = Value::Lit(0.0);
                if self.peek().tok == Tok::LParen {
                    self.next();
                    let (key, kt) = self.ident("`opacity`")?;
                    if key != "opacity" {
                        return self.err(&kt, "shutter takes `opacity=VALUE`");
                    }
                    self.expect(Tok::Eq, "`=`")?;
                    opacity = self.value()?;
                    self.expect(Tok::RParen, "`)`")?;
                }
                Ok(Kind::Shutter { opacity })
            }
            "bs" => {
                self.expect(Tok::LParen, "`(`")?;
                let mut ratio = None;
                let mut swap = false;
                let mut phase = None;
                loop {
                    let (key, kt) = self.ident("`ratio`, `swap` or `phase`")?;
                    match key.as_str() {
                        "ratio" => {
                            self.expect(Tok::Eq, "`=`")?;
                            let m = self.value()?;
                            self.expect(Tok::Colon, "`:` in ratio")?;
                            let n = self.value()?;
                            ratio = Some((m, n));
                        }
                        "swap" => swap = true,
                        "phase" => {
                            self.expect(Tok::Eq, "`=`")?;
                            phase = Some(self.value()?);
                        }
                        _ => return self.err(&kt, format!("unknown beam splitter option `{key}`")),
                    }
                    let t = self.next();
                    match t.tok {
                        Tok::Comma => continue,
                        Tok::RParen => break,
                        _ => return self.err(&t, "expected `,` or `)`"),
                    }
                }
                let Some((m, n)) = ratio else {
                    return self.err(&t, "beam splitter needs `ratio=M:N`");
                };
                Ok(Kind::BeamSplitter { m, n, swap, phase })
            }
            _ => self.err(&t, format!("unknown element kind `{word}`")),
        }
    }

    fn setting(&mut self) -> PResult<Setting> {
        let (elem, _) = self.ident("element name")?;
        self.expect(Tok::Dot, "`.`")?;
        let (key, _) = self.ident("setting name")?;
        self.expect(Tok::Eq, "`=`")?;
        let first = self.value()?;
        let value = if self.peek().tok == Tok::Colon {
            self.next();
            SettingValue::Ratio(first, self.value()?)
        } else {
            SettingValue::Scalar(first)
        };
        Ok(Setting { elem, key, value })
    }

    /// Items inside `{ ... }`, which may span lines and use `,` or `;`.
    fn braced<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        loop {
            while matches!(self.peek().tok, Tok::Newline | Tok::Comma | Tok::Semi) {
                self.next();
            }
            match self.peek().tok {
                Tok::RBrace => {
                    self.next();
                    return Ok(out);
                }
                Tok::Eof => {
                    let t = self.peek().clone();
                    return self.err(&t, "unclosed `{`");
                }
                _ => out.push(item(self)?),
            }
        }
    }
}

pub(crate) fn parse(text: &str) -> Result<(Network, Spans), Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser { toks, pos: 0 };
    let mut net = Network {
        name: String::new(),
        sites: Vec::new(),
        params: Vec::new(),
        elements: Vec::new(),
        arms: Vec::new(),
        configs: Vec::new(),
        blocks: Vec::new(),
        darks: Vec::new(),
    };
    let mut spans = Spans::default();
    let mut diags = Vec::new();
    loop {
        p.skip_newlines();
        if p.peek().tok == Tok::Eof {
            break;
        }
        if let Err(d) = statement(&mut p, &mut net, &mut spans) {
            diags.push(d);
            // resynchronise at the next line
            while !matches!(p.peek().tok, Tok::Newline | Tok::Eof) {
                p.next();
            }
        }
    }
    if net.name.is_empty() && diags.is_empty() {
        diags.push(Diagnostic {
            line: 1,
            col: 1,
            kind: DiagKind::Syntax,
            message: "missing `network NAME`".into(),
        });
    }
    if diags.is_empty() {
        Ok((net, spans))
    } else {
        Err(diags)
    }
}

fn statement(p: &mut Parser, net: &mut Network, spans: &mut Spans) -> PResult<()> {
    let (word, t) = p.ident("a statement keyword")?;
    let at = (t.line, t.col);
    match word.as_str() {
        "network" => {
            let (name, nt) = p.ident("network name")?;
            if !net.name.is_empty() {
                return p.err(&nt, "network declared twice");
            }
            net.name = name;
        }
        "site" => {
            let (name, _) = p.ident("site name")?;
            if net.sites.contains(&name) {
                return Err(dup(at, "site", &name));
            }
            net.sites.push(name);
        }
        "param" => {
            let (name, _) = p.ident("parameter name")?;
            let value = if p.peek().tok == Tok::Eq {
                p.next();
                let vt = p.next();
                match vt.tok {
                    Tok::Num(v) => Some(v),
                    _ => return p.err(&vt, "expected a number"),
                }
            } else {
                None
            };
            if net.params.iter().any(|q| q.name == name) {
                return Err(dup(at, "parameter", &name));
            }
            net.params.push(Param { name, value });
        }
        "elem" => {
            let (name, _) = p.ident("element name")?;
            p.expect(Tok::Colon, "`:`")?;
            let kind = p.kind()?;
            let site = p.site()?;
            if spans.elems.contains_key(&name) {
                return Err(dup(at, "element", &name));
            }
            spans.elems.insert(name.clone(), at);
            net.elements.push(Element { name, kind, site });
        }
        "arm" => {
            let (name, _) = p.ident("arm name")?;
            p.expect(Tok::Colon, "`:`")?;
            let from = p.port_ref()?;
            p.expect(Tok::Arrow, "`->`")?;
            let to = p.port_ref()?;
            let site = p.site()?;
            if spans.arms.contains_key(&name) {
                return Err(dup(at, "arm", &name));
            }
            spans.arms.insert(name.clone(), at);
            net.arms.push(Arm { name, from, to, site });
        }
        "config" => {
            let (name, _) = p.ident("configuration name")?;
            let settings = p.braced(|p| p.setting())?;
            if spans.configs.contains_key(&name) {
                return Err(dup(at, "configuration", &name));
            }
            spans.configs.insert(name.clone(), at);
            net.configs.push(Config { name, settings });
        }
        "block" => {
            let (name, _) = p.ident("block name")?;
            let elems = p.braced(|p| p.ident("element name").map(|x| x.0))?;
            if spans.blocks.contains_key(&name) {
                return Err(dup(at, "block", &name));
            }
            spans.blocks.insert(name.clone(), at);
            net.blocks.push(Block { name, elems });
        }
        "dark" => {
            let (config, _) = p.ident("configuration name")?;
            p.expect(Tok::Colon, "`:`")?;
            let mut targets = Vec::new();
            while let Tok::Ident(_) = p.peek().tok {
                targets.push(p.ident("target")?.0);
            }
            if targets.is_empty() {
                let t = p.peek().clone();
                return p.err(&t, "expected at least one target");
            }
            spans.darks.push(at);
            net.darks.push(DarkDecl { config, targets });
        }
        _ => return p.err(&t, format!("unknown statement `{word}`")),
    }
    p.end_of_statement()
}

fn dup(at: (usize, usize), what: &str, name: &str) -> Diagnostic {
    Diagnostic {
        line: at.0,
        col: at.1,
        kind: DiagKind::Duplicate,
        message: format!("{what} `{name}` declared twice"),
    }
}

/// Parse a site relabeling file: one `NAME @ SITE` per line, `#` comments.
pub fn parse_sites(text: &str) -> Result<Vec<(String, String)>, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser { toks, pos: 0 };
    let mut out = Vec::new();
    let mut diags = Vec::new();
    loop {
        p.skip_newlines();
        if p.peek().tok == Tok::Eof {
            break;
        }
        let r = (|| {
            let (name, _) = p.ident("arm or element name")?;
            let site = p.site()?;
            p.end_of_statement()?;
            Ok((name, site))
        })();
        match r {
            Ok(x) => out.push(x),
            Err(d) => {
                diags.push(d);
                while !matches!(p.peek().tok, Tok::Newline | Tok::Eof) {
                    p.next();
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_negative_and_exponent_numbers() {
        let t = lex("param x = -1.5e-3").unwrap();
        assert_eq!(t[3].tok, Tok::Num(-1.5e-3));
    }

    #[test]
    fn arrow_is_not_a_number() {
        let t = lex("S.c -> X.a").unwrap();
        assert_eq!(t[3].tok, Tok::Arrow);
    }

    #[test]
    fn reports_position_of_bad_character() {
        let e = lex("elem $").unwrap_err();
        assert_eq!((e.line, e.col), (1, 6));
    }

    #[test]
    fn config_block_spans_lines() {
        let text = "network n\nconfig c {\n  S.opacity = 1\n  T.opacity = 0.5, U.ratio = 1:2\n}\n";
        let (net, _) = parse(text).unwrap();
        assert_eq!(net.configs[0].settings.len(), 3);
        assert_eq!(
            net.configs[0].settings[2].value,
            SettingValue::Ratio(Value::Lit(1.0), Value::Lit(2.0))
        );
    }

    #[test]
    fn primes_allowed_in_names() {
        let (net, _) = parse("network n\nsite s\nelem B'' : mirror @ s\n").unwrap();
        assert_eq!(net.elements[0].name, "B''");
    }

    #[test]
    fn site_file() {
        let s = parse_sites("# repartition\nE @ Channel\nX @ Bob\n").unwrap();
        assert_eq!(s, vec![("E".into(), "Channel".into()), ("X".into(), "Bob".into())]);
    }
}
