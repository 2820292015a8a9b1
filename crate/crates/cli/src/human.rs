use std::io::{self, BufRead, Write};

use baire_core::conditions::Condition;
use baire_core::games::{GameConfig, IMove, Move, PlayHistory, Side, Strategy};
use baire_core::tree::FinSeq;
use baire_core::{Error, Result};

/// A person at the terminal: prompts on stderr, answers on stdin.
pub struct Human {
    pub side: Side,
    pub cfg: GameConfig,
}

fn ask(prompt: &str) -> Result<String> {
    let mut err = io::stderr();
    let _ = write!(err, "{prompt}");
    let _ = err.flush();
    let mut line = String::new();
    match io::stdin().lock().read_line(&mut line) {
        Ok(0) => Err(Error::Input("input ended before the game did".into())),
        Ok(_) => Ok(line.trim().to_string()),
        Err(e) => Err(Error::Input(format!("stdin: {e}"))),
    }
}

/// `0,1`, `(0,1)` or `xi=3 0,1`.
pub fn parse_block(text: &str) -> Result<IMove> {
    let (xi, rest) = match text.strip_prefix("xi=") {
        Some(r) => {
            let (n, rest) = r.split_once(char::is_whitespace).unwrap_or((r, ""));
            let n = n.parse().map_err(|_| Error::Input(format!("`{n}` is not a witness letter")))?;
            (Some(n), rest)
        }
        None => (None, text),
    };
    let u: FinSeq = rest.parse()?;
    if u.is_empty() {
        return Err(Error::Input("blocks are non-empty".into()));
    }
    Ok(IMove { xi, u })
}

impl Human {
    fn block(&self, h: &PlayHistory) -> Result<Move> {
        let pending = match h.pending_condition() {
            Some(b) => format!(", must satisfy b={b}"),
            None => String::new(),
        };
        let letters: Vec<String> = self.cfg.letters().iter().map(|x| x.to_string()).collect();
        let xi = if self.cfg.witness_mode() { " (prefix with xi=<n> )" } else { "" };
        let prompt = format!(
            "round {} prefix {}{pending}\nletters {{{}}}, at most {} per block{xi}\nI> ",
            h.round(),
            h.prefix(),
            letters.join(","),
            self.cfg.move_len_cap
        );
        loop {
            match ask(&prompt).and_then(|t| parse_block(&t)) {
                Ok(m) => return Ok(Move::I(m)),
                Err(Error::Input(m)) if !m.starts_with("input ended") => eprintln!("{m}"),
                Err(e) => return Err(e),
            }
        }
    }

    fn condition(&self, h: &PlayHistory) -> Result<Move> {
        let cs = &self.cfg.cs;
        let legal: Vec<String> = self.cfg.conditions().iter().map(Condition::to_string).collect();
        let prompt = format!(
            "round {} prefix {}\nconditions of {}: {} ...\nII> ",
            h.round(),
            h.prefix(),
            cs.name(),
            legal.join(" | ")
        );
        loop {
            let text = ask(&prompt)?;
            match cs.parse_condition(&text) {
                Ok(b) if cs.is_valid(&b) => return Ok(Move::II(b)),
                Ok(b) => eprintln!("`{b}` is not a condition of {}", cs.name()),
                Err(e) => eprintln!("{e}"),
            }
        }
    }
}

impl Strategy for Human {
    fn side(&self) -> Side {
        self.side
    }

    fn next_move(&self, h: &PlayHistory) -> Result<Move> {
        match self.side {
            Side::I => self.block(h),
            Side::II => self.condition(h),
        }
    }
}
