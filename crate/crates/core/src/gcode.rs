//! Parser for a small linear-move subset of RS-274.
//!
//! Accepted words are `N`, `G00`/`G01`, `X`, `Y`, `Z` and `F`, one command
//! per line, case-insensitive. Comments are `( ... )` or `; ...`. The
//! comment `(TOL <mm>)` sets the corner tolerance. Coordinates are absolute
//! millimetres, feeds are mm/min in the file and mm/s once parsed.

use std::fmt::Write as _;

use thiserror::Error;

use crate::kinematics::FilterCount;
use crate::scalar::{Scalar, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("feed override must lie in (0, 2], got {0}")]
    FeedOverride(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: syntax error near `{token}`")]
    Syntax { line: usize, token: String },
    #[error("line {line}: unsupported command `{token}`")]
    Unsupported { line: usize, token: String },
    #[error("line {line}: invalid value `{token}`: {reason}")]
    InvalidValue {
        line: usize,
        token: String,
        reason: &'static str,
    },
    #[error("line {line}: linear move without a feedrate (no F word and no default feed)")]
    MissingFeed { line: usize },
    #[error("discontinuous path between line {from} and line {to}")]
    Discontinuous { from: usize, to: usize },
    #[error("program contains no moves")]
    Empty,
}

impl ParseError {
    /// Source line the diagnostic refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::Unsupported { line, .. }
            | ParseError::InvalidValue { line, .. }
            | ParseError::MissingFeed { line } => Some(*line),
            ParseError::Discontinuous { to, .. } => Some(*to),
            ParseError::Empty => None,
        }
    }
}

/// Machine and run settings. Feeds are in mm/min here, as in the file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProgramConfig<T> {
    /// Feed used by moves that precede any `F` word.
    pub default_feed: Option<T>,
    /// Feed used for `G00` moves.
    pub rapid_feed: T,
    /// Corner tolerance (mm).
    pub tolerance: T,
    /// Maximum jerk (mm/s³).
    pub j_max: T,
    pub filter_count: FilterCount,
    /// Trace sampling period (s).
    pub sample_time: T,
    /// Scale applied to every programmed feed.
    pub feed_override: T,
}

impl<T: Scalar> Default for ProgramConfig<T> {
    fn default() -> Self {
        Self {
            default_feed: None,
            rapid_feed: T::lit(10_000.0),
            tolerance: T::lit(0.01),
            j_max: T::lit(5000.0),
            filter_count: FilterCount::Three,
            sample_time: T::lit(0.001),
            feed_override: T::one(),
        }
    }
}

impl<T: Scalar> ProgramConfig<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::NonPositive {
                    name,
                    value: v.as_f64(),
                })
            }
        };
        if let Some(f) = self.default_feed {
            positive("default feed", f)?;
        }
        positive("rapid feed", self.rapid_feed)?;
        positive("tolerance", self.tolerance)?;
        positive("maximum jerk", self.j_max)?;
        positive("sample time", self.sample_time)?;
        let o = self.feed_override;
        if !(o > T::zero() && o <= T::lit(2.0)) {
            return Err(ConfigError::FeedOverride(o.as_f64()));
        }
        Ok(())
    }
}

/// One linear move after normalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CLBlock<T> {
    pub index: usize,
    pub start: Vec3<T>,
    pub end: Vec3<T>,
    /// Programmed feed (mm/s), before any override.
    pub feed: T,
    pub length: T,
    pub direction: Vec3<T>,
    pub rapid: bool,
    /// 1-based source line.
    pub line: usize,
}

impl<T: Scalar> CLBlock<T> {
    pub fn feed_mm_min(&self) -> T {
        self.feed * T::lit(60.0)
    }
}

/// A move as read from the file, before zero-length moves are dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawMove<T> {
    pub start: Vec3<T>,
    pub end: Vec3<T>,
    /// mm/s
    pub feed: T,
    pub rapid: bool,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program<T> {
    blocks: Vec<CLBlock<T>>,
    config: ProgramConfig<T>,
}

impl<T: Scalar> Program<T> {
    /// Builds a program from chained blocks.
    pub fn new(blocks: Vec<CLBlock<T>>, config: ProgramConfig<T>) -> Result<Self, ParseError> {
        let raw: Vec<_> = blocks
            .iter()
            .map(|b| RawMove {
                start: b.start,
                end: b.end,
                feed: b.feed,
                rapid: b.rapid,
                line: b.line,
            })
            .collect();
        Ok(Self {
            blocks: normalize_blocks(&raw)?,
            config,
        })
    }

    pub fn blocks(&self) -> &[CLBlock<T>] {
        &self.blocks
    }

    pub fn config(&self) -> &ProgramConfig<T> {
        &self.config
    }

    pub fn config_mut(&mut self) -> &mut ProgramConfig<T> {
        &mut self.config
    }

    /// Source line of every block, in order.
    pub fn source_lines(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.line).collect()
    }

    pub fn start(&self) -> Vec3<T> {
        self.blocks[0].start
    }

    pub fn end(&self) -> Vec3<T> {
        self.blocks[self.blocks.len() - 1].end
    }

    pub fn path_length(&self) -> T {
        self.blocks.iter().map(|b| b.length).sum()
    }

    /// Same program travelled backwards.
    pub fn reversed(&self) -> Self {
        let n = self.blocks.len();
        let blocks = self
            .blocks
            .iter()
            .rev()
            .enumerate()
            .map(|(k, b)| CLBlock {
                index: k,
                start: b.end,
                end: b.start,
                direction: -b.direction,
                line: self.blocks[n - 1 - k].line,
                ..*b
            })
            .collect();
        Self {
            blocks,
            config: self.config,
        }
    }
}

/// Parses `text`, resolving modal state, then normalizes the moves.
pub fn parse_program<T: Scalar>(text: &str, defaults: ProgramConfig<T>) -> Result<Program<T>, ParseError> {
    let (moves, config) = parse_moves(text, defaults)?;
    Ok(Program {
        blocks: normalize_blocks(&moves)?,
        config,
    })
}

/// Parses `text` into raw moves without dropping degenerate ones. The
/// returned config carries any tolerance directive.
pub fn parse_moves<T: Scalar>(
    text: &str,
    defaults: ProgramConfig<T>,
) -> Result<(Vec<RawMove<T>>, ProgramConfig<T>), ParseError> {
    let mut config = defaults;
    let per_min = T::lit(60.0);
    let mut position = Vec3::zero();
    let mut feed = defaults.default_feed.map(|f| f / per_min);
    let mut mode: Option<bool> = None; // Some(rapid)
    let mut moves = Vec::new();

    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let (code, comments) = split_comments(raw_line, line)?;
        for c in comments {
            if let Some(tol) = tolerance_directive::<T>(&c, line)? {
                config.tolerance = tol;
            }
        }
        let code = code.trim();
        if code.is_empty() || code == "%" {
            continue;
        }
        let words = tokenize(code, line)?;

        let mut g: Option<bool> = None;
        let mut axes: [Option<T>; 3] = [None; 3];
        let mut f_word: Option<T> = None;
        for w in words {
            let dup = || ParseError::Syntax {
                line,
                token: w.text.clone(),
            };
            match w.letter {
                'N' => {
                    if w.value.parse::<u64>().is_err() {
                        return Err(ParseError::Syntax { line, token: w.text });
                    }
                }
                'G' => {
                    let rapid = match w.value.parse::<f64>() {
                        Ok(v) if v == 0.0 && !w.value.contains('.') => true,
                        Ok(v) if v == 1.0 && !w.value.contains('.') => false,
                        Ok(_) => return Err(ParseError::Unsupported { line, token: w.text }),
                        Err(_) => return Err(ParseError::Syntax { line, token: w.text }),
                    };
                    if g.replace(rapid).is_some() {
                        return Err(dup());
                    }
                }
                'X' | 'Y' | 'Z' => {
                    let axis = (w.letter as u8 - b'X') as usize;
                    let v = number::<T>(&w, line)?;
                    if axes[axis].replace(v).is_some() {
                        return Err(dup());
                    }
                }
                'F' => {
                    let v = number::<T>(&w, line)?;
                    if v <= T::zero() {
                        return Err(ParseError::InvalidValue {
                            line,
                            token: w.text,
                            reason: "feed must be positive",
                        });
                    }
                    if f_word.replace(v / per_min).is_some() {
                        return Err(dup());
                    }
                }
                _ => return Err(ParseError::Unsupported { line, token: w.text }),
            }
        }

        if let Some(f) = f_word {
            feed = Some(f);
        }
        if g.is_some() {
            mode = g;
        }
        if axes.iter().all(Option::is_none) {
            continue;
        }
        let rapid = mode.ok_or_else(|| ParseError::Syntax {
            line,
            token: code.split_whitespace().next().unwrap_or(code).to_string(),
        })?;
        let move_feed = if rapid {
            config.rapid_feed / per_min
        } else {
            feed.ok_or(ParseError::MissingFeed { line })?
        };
        let mut end = position;
        for (k, v) in axes.iter().enumerate() {
            if let Some(v) = v {
                end.0[k] = *v;
            }
        }
        moves.push(RawMove {
            start: position,
            end,
            feed: move_feed,
            rapid,
            line,
        });
        position = end;
    }
    Ok((moves, config))
}

/// Drops zero-length moves, checks chaining and builds indexed blocks.
pub fn normalize_blocks<T: Scalar>(raw: &[RawMove<T>]) -> Result<Vec<CLBlock<T>>, ParseError> {
    let mut blocks: Vec<CLBlock<T>> = Vec::with_capacity(raw.len());
    let mut prev: Option<&RawMove<T>> = None;
    for m in raw {
        if let Some(p) = prev {
            let scale = T::one() + p.end.0.iter().fold(T::zero(), |a, v| a.max(v.abs()));
            if p.end.max_abs_diff(m.start) > T::length_eps() * scale {
                return Err(ParseError::Discontinuous {
                    from: p.line,
                    to: m.line,
                });
            }
        }
        prev = Some(m);
        let delta = m.end - m.start;
        let length = delta.norm();
        if length <= T::length_eps() {
            continue;
        }
        blocks.push(CLBlock {
            index: blocks.len(),
            start: m.start,
            end: m.end,
            feed: m.feed,
            length,
            direction: delta.scale(T::one() / length),
            rapid: m.rapid,
            line: m.line,
        });
    }
    if blocks.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(blocks)
}

/// Writes a program back out as text that parses to the same geometry.
pub fn to_gcode<T: Scalar>(program: &Program<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(TOL {})", program.config.tolerance);
    let mut last_feed: Option<T> = None;
    for b in &program.blocks {
        let [x, y, z] = b.end.0;
        if b.rapid {
            let _ = writeln!(out, "G00 X{x} Y{y} Z{z}");
        } else {
            let f = b.feed_mm_min();
            if last_feed == Some(b.feed) {
                let _ = writeln!(out, "G01 X{x} Y{y} Z{z}");
            } else {
                let _ = writeln!(out, "G01 X{x} Y{y} Z{z} F{f}");
                last_feed = Some(b.feed);
            }
        }
    }
    out
}

struct Word {
    letter: char,
    value: String,
    text: String,
}

fn split_comments(line: &str, number: usize) -> Result<(String, Vec<String>), ParseError> {
    let mut code = String::new();
    let mut comments = Vec::new();
    let mut chars = line.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            ';' => {
                comments.push(line[i + 1..].to_string());
                break;
            }
            '(' => {
                let rest = &line[i + 1..];
                let close = rest.find(')').ok_or_else(|| ParseError::Syntax {
                    line: number,
                    token: line[i..].to_string(),
                })?;
                comments.push(rest[..close].to_string());
                // skip past the closing parenthesis
                for _ in 0..=rest[..close].chars().count() {
                    chars.next();
                }
                code.push(' ');
            }
            ')' => {
                return Err(ParseError::Syntax {
                    line: number,
                    token: ")".into(),
                })
            }
            _ => code.push(c),
        }
    }
    Ok((code, comments))
}

fn tolerance_directive<T: Scalar>(comment: &str, line: usize) -> Result<Option<T>, ParseError> {
    let mut parts = comment.split_whitespace();
    match parts.next() {
        Some(w) if w.eq_ignore_ascii_case("TOL") => {}
        _ => return Ok(None),
    }
    let token = comment.trim().to_string();
    let value = match (parts.next(), parts.next()) {
        (Some(v), None) => v.parse::<f64>().map_err(|_| ParseError::Syntax {
            line,
            token: token.clone(),
        })?,
        _ => return Err(ParseError::Syntax { line, token }),
    };
    if !(value > 0.0 && value.is_finite()) {
        return Err(ParseError::InvalidValue {
            line,
            token,
            reason: "tolerance must be positive",
        });
    }
    Ok(Some(T::lit(value)))
}

fn tokenize(code: &str, line: usize) -> Result<Vec<Word>, ParseError> {
    let chars: Vec<char> = code.chars().collect();
    let mut words = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_ascii_alphabetic() {
            let token: String = chars[i..].iter().take_while(|c| !c.is_whitespace()).collect();
            return Err(ParseError::Syntax { line, token });
        }
        let letter = c.to_ascii_uppercase();
        i += 1;
        while i < chars.len() && chars[i] == ' ' {
            i += 1;
        }
        let begin = i;
        while i < chars.len() && (chars[i].is_ascii_digit() || matches!(chars[i], '.' | '+' | '-')) {
            i += 1;
        }
        let value: String = chars[begin..i].iter().collect();
        let text = format!("{c}{value}");
        if value.is_empty() {
            return Err(ParseError::Syntax { line, token: text });
        }
        words.push(Word {
            letter,
            value,
            text,
        });
    }
    Ok(words)
}

fn number<T: Scalar>(w: &Word, line: usize) -> Result<T, ParseError> {
    match w.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(T::lit(v)),
        _ => Err(ParseError::Syntax {
            line,
            token: w.text.clone(),
        }),
    }
}
