use std::collections::HashMap;

use thiserror::Error;

use super::{Branch, Bus, Generator, NetworkCase, ANGLE_CLAMP_DEG};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing section `mpc.{0}`")]
    MissingSection(&'static str),
    #[error("line {line}: unsupported feature: {feature}")]
    Unsupported { line: usize, feature: String },
    #[error("invalid case: {0}")]
    Invalid(String),
}

const BUS_COLS: usize = 13;
const GEN_COLS: usize = 10;
const BRANCH_COLS: usize = 13;
const GENCOST_MIN_COLS: usize = 4;

#[derive(Debug)]
struct Row {
    line: usize,
    values: Vec<f64>,
}

#[derive(Debug, Default)]
struct RawCase {
    name: Option<String>,
    base_mva: Option<f64>,
    matrices: HashMap<String, Vec<Row>>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_number(tok: &str, line: usize) -> Result<f64, ParseError> {
    match tok {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().map_err(|_| ParseError::Syntax {
            line,
            msg: format!("not a number: `{tok}`"),
        }),
    }
}

/// Splits a chunk of matrix body text into rows (`;` or newline terminated).
fn push_rows(body: &str, line: usize, rows: &mut Vec<Row>) -> Result<(), ParseError> {
    for chunk in body.split(';') {
        let values = chunk
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| parse_number(t, line))
            .collect::<Result<Vec<_>, _>>()?;
        if !values.is_empty() {
            rows.push(Row { line, values });
        }
    }
    Ok(())
}

fn scan(text: &str) -> Result<RawCase, ParseError> {
    let mut raw = RawCase::default();
    // (matrix name, rows so far) while inside `[ ... ]`
    let mut open: Option<(String, Vec<Row>)> = None;

    for (idx, full_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(full_line).trim();
        if line.is_empty() {
            continue;
        }

        if let Some((name, mut rows)) = open.take() {
            match line.find(']') {
                Some(end) => {
                    push_rows(&line[..end], line_no, &mut rows)?;
                    raw.matrices.insert(name, rows);
                }
                None => {
                    push_rows(line, line_no, &mut rows)?;
                    open = Some((name, rows));
                }
            }
            continue;
        }

        if let Some(rest) = line.strip_prefix("function") {
            if let Some((_, name)) = rest.split_once('=') {
                raw.name = Some(name.trim().trim_end_matches(';').to_string());
            }
            continue;
        }

        let Some(rest) = line.strip_prefix("mpc.") else {
            continue;
        };
        let Some((field, value)) = rest.split_once('=') else {
            continue;
        };
        let field = field.trim();
        let value = value.trim();

        if field == "baseMVA" {
            let v = value.trim_end_matches(';').trim();
            raw.base_mva = Some(parse_number(v, line_no)?);
        } else if let Some(body) = value.strip_prefix('[') {
            let mut rows = Vec::new();
            match body.find(']') {
                Some(end) => {
                    push_rows(&body[..end], line_no, &mut rows)?;
                    raw.matrices.insert(field.to_string(), rows);
                }
                None => {
                    push_rows(body, line_no, &mut rows)?;
                    open = Some((field.to_string(), rows));
                }
            }
        }
        // Cell arrays (`{`), strings and other fields are ignored.
    }

    if let Some((name, _)) = open {
        return Err(ParseError::Syntax {
            line: text.lines().count(),
            msg: format!("unterminated matrix `mpc.{name}`"),
        });
    }
    Ok(raw)
}

fn take_matrix(
    raw: &mut RawCase,
    name: &'static str,
    min_cols: usize,
) -> Result<Vec<Row>, ParseError> {
    let rows = raw
        .matrices
        .remove(name)
        .ok_or(ParseError::MissingSection(name))?;
    for row in &rows {
        if row.values.len() < min_cols {
            return Err(ParseError::Syntax {
                line: row.line,
                msg: format!(
                    "`mpc.{name}` row has {} columns, expected at least {min_cols}",
                    row.values.len()
                ),
            });
        }
    }
    Ok(rows)
}

fn as_label(v: f64, line: usize) -> Result<i64, ParseError> {
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(ParseError::Syntax {
            line,
            msg: format!("bus label `{v}` is not an integer"),
        });
    }
    Ok(v as i64)
}

/// Converts an angle limit pair in degrees to clamped radians. MATPOWER
/// treats `0, 0` (and anything beyond ±360°) as unconstrained.
fn angle_limits(angmin_deg: f64, angmax_deg: f64) -> (f64, f64) {
    let (lo, hi) = if angmin_deg == 0.0 && angmax_deg == 0.0 {
        (-ANGLE_CLAMP_DEG, ANGLE_CLAMP_DEG)
    } else {
        (angmin_deg, angmax_deg)
    };
    (
        lo.max(-ANGLE_CLAMP_DEG).to_radians(),
        hi.min(ANGLE_CLAMP_DEG).to_radians(),
    )
}

/// Parses MATPOWER case text (the subset used by PGLib) into a validated,
/// per-unit [`NetworkCase`].
pub fn parse_matpower(text: &str) -> Result<NetworkCase, ParseError> {
    let mut raw = scan(text)?;
    let base_mva = raw.base_mva.ok_or(ParseError::MissingSection("baseMVA"))?;
    let bus_rows = take_matrix(&mut raw, "bus", BUS_COLS)?;
    let gen_rows = take_matrix(&mut raw, "gen", GEN_COLS)?;
    let branch_rows = take_matrix(&mut raw, "branch", BRANCH_COLS)?;
    let gencost_rows = match raw.matrices.contains_key("gencost") {
        true => Some(take_matrix(&mut raw, "gencost", GENCOST_MIN_COLS)?),
        false => None,
    };

    let mut index_of = HashMap::with_capacity(bus_rows.len());
    let mut buses = Vec::with_capacity(bus_rows.len());
    for row in &bus_rows {
        let v = &row.values;
        let id = as_label(v[0], row.line)?;
        if index_of.insert(id, buses.len()).is_some() {
            return Err(ParseError::Syntax {
                line: row.line,
                msg: format!("duplicate bus id {id}"),
            });
        }
        buses.push(Bus {
            id,
            pd: v[2] / base_mva,
            qd: v[3] / base_mva,
            gs: v[4] / base_mva,
            bs: v[5] / base_mva,
            vmax: v[11],
            vmin: v[12],
        });
    }

    let lookup = |v: f64, line: usize| -> Result<usize, ParseError> {
        let id = as_label(v, line)?;
        index_of.get(&id).copied().ok_or(ParseError::Syntax {
            line,
            msg: format!("reference to unknown bus {id}"),
        })
    };

    let mut branches = Vec::with_capacity(branch_rows.len());
    for row in &branch_rows {
        let v = &row.values;
        let (angmin, angmax) = angle_limits(v[11], v[12]);
        branches.push(Branch {
            from_bus: lookup(v[0], row.line)?,
            to_bus: lookup(v[1], row.line)?,
            r: v[2],
            x: v[3],
            b_charge: v[4],
            rate_a: v[5] / base_mva,
            tap: if v[8] == 0.0 { 1.0 } else { v[8] },
            shift: v[9].to_radians(),
            status: v[10] != 0.0,
            angmin,
            angmax,
        });
    }

    let mut gens = Vec::with_capacity(gen_rows.len());
    for row in &gen_rows {
        let v = &row.values;
        gens.push(Generator {
            bus: lookup(v[0], row.line)?,
            qmax: v[3] / base_mva,
            qmin: v[4] / base_mva,
            status: v[7] > 0.0,
            pmax: v[8] / base_mva,
            pmin: v[9] / base_mva,
            cost_c2: 0.0,
            cost_c1: 0.0,
            cost_c0: 0.0,
        });
    }

    if let Some(rows) = gencost_rows {
        if rows.len() < gens.len() {
            return Err(ParseError::Invalid(format!(
                "`mpc.gencost` has {} rows for {} generators",
                rows.len(),
                gens.len()
            )));
        }
        // Rows beyond the first `ngen` are reactive costs; not modelled.
        for (g, row) in gens.iter_mut().zip(&rows) {
            let v = &row.values;
            let model = v[0];
            if model == 1.0 {
                return Err(ParseError::Unsupported {
                    line: row.line,
                    feature: "piecewise-linear cost model".to_string(),
                });
            }
            if model != 2.0 {
                return Err(ParseError::Syntax {
                    line: row.line,
                    msg: format!("unknown cost model code {model}"),
                });
            }
            let n = v[3];
            if n.fract() != 0.0 || n < 0.0 {
                return Err(ParseError::Syntax {
                    line: row.line,
                    msg: format!("invalid coefficient count {n}"),
                });
            }
            let n = n as usize;
            if n > 3 {
                return Err(ParseError::Unsupported {
                    line: row.line,
                    feature: format!("polynomial cost of degree {}", n - 1),
                });
            }
            if v.len() < GENCOST_MIN_COLS + n {
                return Err(ParseError::Syntax {
                    line: row.line,
                    msg: format!(
                        "`mpc.gencost` row has {} columns, expected at least {}",
                        v.len(),
                        GENCOST_MIN_COLS + n
                    ),
                });
            }
            // Highest order first: c(n-1) ... c0
            let coeffs = &v[GENCOST_MIN_COLS..GENCOST_MIN_COLS + n];
            let mut padded = [0.0; 3];
            padded[3 - n..].copy_from_slice(coeffs);
            g.cost_c2 = padded[0];
            g.cost_c1 = padded[1];
            g.cost_c0 = padded[2];
        }
    }

    let case = NetworkCase {
        name: raw.name.unwrap_or_else(|| "unnamed".to_string()),
        base_mva,
        buses,
        branches,
        gens,
    };
    case.validate()?;
    Ok(case)
}
