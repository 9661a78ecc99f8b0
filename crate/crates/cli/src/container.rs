//! Versioned text container for trained models. The format favors bit-exact
//! portability: every number prints with 17 significant digits, so loading a
//! file and saving it again reproduces the same bytes, and a loaded model
//! computes exactly what the saved one did.
//!
//! Layout, in fixed order (layer pairs repeat for stacked models):
//!
//! ```text
//! RCMODEL 1
//! layers <count>
//! input_matrix <rows> <cols>      one line of values per row
//! reservoir dense <rows> <cols>   or: reservoir sparse <rows> <cols> <nnz>
//! readout <rows> <cols>
//! modifier <base> <nonlinear> <constant>
//! meta                            fixed key-value lines, closed by `end`
//! ```

use std::path::Path;

use rescomp::esn::{Activation, EsnModel};
use rescomp::linalg::{DenseMatrix, Matrix, SparseMatrix};
use rescomp::states::{BaseModifier, Nonlinear, StateModifier};
use rescomp::train::ReadoutLayer;
use rescomp::{Error, Result};

use crate::config::{modifier_name, nonlinear_name};

pub const MAGIC: &str = "RCMODEL 1";

#[derive(Debug, Clone)]
pub struct ModelMeta {
    pub washout: usize,
    pub seed: u64,
    pub config_digest: String,
    pub final_state: Vec<f64>,
    pub last_input: Vec<f64>,
}

#[derive(Debug)]
pub struct SavedModel {
    pub model: EsnModel,
    pub readout: ReadoutLayer,
    pub meta: ModelMeta,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_row(values: &[f64]) -> String {
    values.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(" ")
}

pub fn save(saved: &SavedModel) -> Result<String> {
    let model = &saved.model;
    if model.is_hybrid() {
        return Err(Error::InvalidArgument(
            "hybrid models embed caller-supplied code and cannot be serialized".into(),
        ));
    }
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("layers {}\n", model.layers().len()));
    for layer in model.layers() {
        let w = layer.input_matrix();
        out.push_str(&format!("input_matrix {} {}\n", w.rows(), w.cols()));
        for r in 0..w.rows() {
            out.push_str(&fmt_row(w.row(r)));
            out.push('\n');
        }
        match layer.reservoir() {
            Matrix::Dense(m) => {
                out.push_str(&format!("reservoir dense {} {}\n", m.rows(), m.cols()));
                for r in 0..m.rows() {
                    out.push_str(&fmt_row(m.row(r)));
                    out.push('\n');
                }
            }
            Matrix::Sparse(m) => {
                out.push_str(&format!(
                    "reservoir sparse {} {} {}\n",
                    m.rows(),
                    m.cols(),
                    m.nnz()
                ));
                for &(r, c, v) in m.entries() {
                    out.push_str(&format!("{r} {c} {}\n", fmt(v)));
                }
            }
        }
    }
    let w = &saved.readout.w_out;
    out.push_str(&format!("readout {} {}\n", w.rows(), w.cols()));
    for r in 0..w.rows() {
        out.push_str(&fmt_row(w.row(r)));
        out.push('\n');
    }
    let m = model.modifier();
    out.push_str(&format!(
        "modifier {} {} {}\n",
        modifier_name(m.base),
        nonlinear_name(m.nonlinear),
        fmt(m.constant)
    ));
    out.push_str("meta\n");
    out.push_str(&format!("leak_rate {}\n", fmt(model.leak_rate())));
    out.push_str(&format!(
        "activation {}\n",
        match model.activation() {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    ));
    out.push_str(&format!("lambda {}\n", fmt(saved.readout.lambda)));
    out.push_str(&format!("washout {}\n", saved.meta.washout));
    out.push_str(&format!("seed {}\n", saved.meta.seed));
    out.push_str(&format!("config_digest {}\n", saved.meta.config_digest));
    out.push_str(&format!("final_state {}\n", fmt_row(&saved.meta.final_state)));
    out.push_str(&format!("last_input {}\n", fmt_row(&saved.meta.last_input)));
    out.push_str("end\n");
    Ok(out)
}

pub fn save_to_path(saved: &SavedModel, path: &Path) -> Result<()> {
    std::fs::write(path, save(saved)?)?;
    Ok(())
}

struct Reader<'a> {
    lines: std::str::Lines<'a>,
    lineno: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines(),
            lineno: 0,
        }
    }

    fn next(&mut self, section: &str) -> Result<&'a str> {
        self.lineno += 1;
        self.lines.next().ok_or_else(|| {
            Error::Malformed(format!(
                "model file: {section} block: file ends at line {}",
                self.lineno
            ))
        })
    }
}

fn bad(section: &str, lineno: usize, what: &str) -> Error {
    Error::Malformed(format!(
        "model file: {section} block: {what} (line {lineno})"
    ))
}

fn parse_f64(section: &str, lineno: usize, token: &str) -> Result<f64> {
    token
        .parse()
        .map_err(|_| bad(section, lineno, &format!("`{token}` is not a number")))
}

fn parse_usize(section: &str, lineno: usize, token: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| bad(section, lineno, &format!("`{token}` is not a count")))
}

fn parse_values(section: &str, lineno: usize, line: &str, expect: usize) -> Result<Vec<f64>> {
    let values: Vec<&str> = line.split_whitespace().collect();
    if values.len() != expect {
        return Err(bad(
            section,
            lineno,
            &format!("expected {expect} values, found {}", values.len()),
        ));
    }
    values
        .iter()
        .map(|t| parse_f64(section, lineno, t))
        .collect()
}

fn read_dense(reader: &mut Reader, section: &str, rows: usize, cols: usize) -> Result<DenseMatrix> {
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let line = reader.next(section)?;
        values.extend(parse_values(section, reader.lineno, line, cols)?);
    }
    DenseMatrix::new(rows, cols, values)
}

fn read_block_header<'a>(
    reader: &mut Reader<'a>,
    expected: &str,
) -> Result<Vec<&'a str>> {
    let line = reader.next(expected)?;
    let mut parts = line.split_whitespace();
    let name = parts.next().unwrap_or("");
    if name != expected {
        return Err(bad(
            expected,
            reader.lineno,
            &format!("expected a `{expected}` block, found `{name}`"),
        ));
    }
    Ok(parts.collect())
}

fn meta_line<'a>(reader: &mut Reader<'a>, key: &str) -> Result<&'a str> {
    let line = reader.next("meta")?;
    line.strip_prefix(key)
        .map(str::trim)
        .ok_or_else(|| bad("meta", reader.lineno, &format!("expected `{key} ...`")))
}

pub fn load(text: &str) -> Result<SavedModel> {
    let mut reader = Reader::new(text);
    let magic = reader.next("header")?;
    if magic != MAGIC {
        return Err(bad(
            "header",
            reader.lineno,
            &format!("expected `{MAGIC}`, found `{magic}`"),
        ));
    }
    let header = read_block_header(&mut reader, "layers")?;
    if header.len() != 1 {
        return Err(bad("layers", reader.lineno, "expected `layers <count>`"));
    }
    let layer_count = parse_usize("layers", reader.lineno, header[0])?;
    if layer_count == 0 {
        return Err(bad("layers", reader.lineno, "layer count must be positive"));
    }

    let mut stack = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let dims = read_block_header(&mut reader, "input_matrix")?;
        if dims.len() != 2 {
            return Err(bad(
                "input_matrix",
                reader.lineno,
                "expected `input_matrix <rows> <cols>`",
            ));
        }
        let rows = parse_usize("input_matrix", reader.lineno, dims[0])?;
        let cols = parse_usize("input_matrix", reader.lineno, dims[1])?;
        let input = read_dense(&mut reader, "input_matrix", rows, cols)?;

        let header = read_block_header(&mut reader, "reservoir")?;
        let reservoir = match header.first().copied() {
            Some("dense") if header.len() == 3 => {
                let rows = parse_usize("reservoir", reader.lineno, header[1])?;
                let cols = parse_usize("reservoir", reader.lineno, header[2])?;
                Matrix::Dense(read_dense(&mut reader, "reservoir", rows, cols)?)
            }
            Some("sparse") if header.len() == 4 => {
                let rows = parse_usize("reservoir", reader.lineno, header[1])?;
                let cols = parse_usize("reservoir", reader.lineno, header[2])?;
                let nnz = parse_usize("reservoir", reader.lineno, header[3])?;
                let mut entries = Vec::with_capacity(nnz);
                for _ in 0..nnz {
                    let line = reader.next("reservoir")?;
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(bad(
                            "reservoir",
                            reader.lineno,
                            "expected `<row> <col> <value>`",
                        ));
                    }
                    entries.push((
                        parse_usize("reservoir", reader.lineno, parts[0])?,
                        parse_usize("reservoir", reader.lineno, parts[1])?,
                        parse_f64("reservoir", reader.lineno, parts[2])?,
                    ));
                }
                Matrix::Sparse(SparseMatrix::new(rows, cols, entries)?)
            }
            _ => {
                return Err(bad(
                    "reservoir",
                    reader.lineno,
                    "expected `reservoir dense <rows> <cols>` or `reservoir sparse <rows> <cols> <nnz>`",
                ))
            }
        };
        stack.push((input, reservoir));
    }

    let dims = read_block_header(&mut reader, "readout")?;
    if dims.len() != 2 {
        return Err(bad(
            "readout",
            reader.lineno,
            "expected `readout <rows> <cols>`",
        ));
    }
    let m = parse_usize("readout", reader.lineno, dims[0])?;
    let d_z = parse_usize("readout", reader.lineno, dims[1])?;
    let w_out = read_dense(&mut reader, "readout", m, d_z)?;

    let header = read_block_header(&mut reader, "modifier")?;
    if header.len() != 3 {
        return Err(bad(
            "modifier",
            reader.lineno,
            "expected `modifier <base> <nonlinear> <constant>`",
        ));
    }
    let base = match header[0] {
        "default" => BaseModifier::Default,
        "extended" => BaseModifier::Extended,
        "padded" => BaseModifier::Padded,
        "padded-extended" => BaseModifier::PaddedExtended,
        other => return Err(bad("modifier", reader.lineno, &format!("unknown base `{other}`"))),
    };
    let nonlinear = match header[1] {
        "none" => Nonlinear::None,
        "t1" => Nonlinear::T1,
        "t2" => Nonlinear::T2,
        "t3" => Nonlinear::T3,
        other => {
            return Err(bad(
                "modifier",
                reader.lineno,
                &format!("unknown nonlinear rule `{other}`"),
            ))
        }
    };
    let constant = parse_f64("modifier", reader.lineno, header[2])?;
    let modifier = StateModifier::new(base, nonlinear, constant)?;

    let meta_tag = reader.next("meta")?;
    if meta_tag != "meta" {
        return Err(bad("meta", reader.lineno, "expected `meta`"));
    }
    let leak_rate = parse_f64("meta", reader.lineno + 1, meta_line(&mut reader, "leak_rate")?)?;
    let activation = match meta_line(&mut reader, "activation")? {
        "tanh" => Activation::Tanh,
        "identity" => Activation::Identity,
        other => {
            return Err(bad(
                "meta",
                reader.lineno,
                &format!("unknown activation `{other}`"),
            ))
        }
    };
    let lambda = parse_f64("meta", reader.lineno + 1, meta_line(&mut reader, "lambda")?)?;
    let washout = parse_usize("meta", reader.lineno + 1, meta_line(&mut reader, "washout")?)?;
    let seed = {
        let token = meta_line(&mut reader, "seed")?;
        token
            .parse::<u64>()
            .map_err(|_| bad("meta", reader.lineno, &format!("`{token}` is not a seed")))?
    };
    let config_digest = meta_line(&mut reader, "config_digest")?.to_string();
    let final_state: Vec<f64> = {
        let line = meta_line(&mut reader, "final_state")?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        tokens
            .iter()
            .map(|t| parse_f64("meta", reader.lineno, t))
            .collect::<Result<_>>()?
    };
    let last_input: Vec<f64> = {
        let line = meta_line(&mut reader, "last_input")?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        tokens
            .iter()
            .map(|t| parse_f64("meta", reader.lineno, t))
            .collect::<Result<_>>()?
    };
    let end = reader.next("meta")?;
    if end != "end" {
        return Err(bad("meta", reader.lineno, "expected `end`"));
    }
    if reader.lines.next().is_some() {
        return Err(bad("meta", reader.lineno + 1, "trailing data after `end`"));
    }

    let model = EsnModel::deep(stack, leak_rate, activation, modifier)?;
    let expected_features = model.output_dimension(model.modifier());
    if d_z != expected_features {
        return Err(bad(
            "readout",
            0,
            &format!(
                "readout consumes {d_z} features but the stored model produces {expected_features}"
            ),
        ));
    }
    if final_state.len() != model.state_size() {
        return Err(bad(
            "meta",
            0,
            &format!(
                "final_state has {} values but the model carries {} units",
                final_state.len(),
                model.state_size()
            ),
        ));
    }
    if last_input.len() != model.input_dimension() {
        return Err(bad(
            "meta",
            0,
            &format!(
                "last_input has {} values but the model expects {}",
                last_input.len(),
                model.input_dimension()
            ),
        ));
    }
    Ok(SavedModel {
        model,
        readout: ReadoutLayer {
            w_out,
            lambda,
            feature_dim: d_z,
            target_dim: m,
        },
        meta: ModelMeta {
            washout,
            seed,
            config_digest,
            final_state,
            last_input,
        },
    })
}

pub fn load_from_path(path: &Path) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path)?;
    load(&text)
}
