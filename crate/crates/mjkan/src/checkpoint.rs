//! Versioned plain-text model checkpoints.
//!
//! The format is line-oriented: a header line, then one block per layer with
//! explicit shape headers followed by whitespace-separated decimal floats.
//! Floats are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every parameter bit-exactly (the contract only
//! requires 1e-15 relative).
//!
//! ```text
//! mjkan-checkpoint v1
//! layers 3
//! layer mjkan
//! dims 1 64
//! basis gaussian 25 -3 3
//! sigma 0.25
//! base 1 0
//! gamma 1 25 64
//! <1600 floats...>
//! ...
//! layer squash
//! range -3 3
//! layer dense
//! dims 64 1
//! weight 64 1
//! <64 floats...>
//! bias 1
//! <1 float>
//! end
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::layer::MjkanLayer;
use crate::model::{DenseLayer, Layer, SequentialModel, Squash};
use crate::rbf::{BasisKind, RbfBasis};
use crate::tensor::{Matrix, Tensor3};

const HEADER: &str = "mjkan-checkpoint v1";
const FLOATS_PER_LINE: usize = 8;

/// Write a model to a writer in the checkpoint format.
pub fn write_model(model: &SequentialModel<f64>, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "layers {}", model.layers().len())?;
    for layer in model.layers() {
        match layer {
            Layer::Mjkan(l) => {
                writeln!(out, "layer mjkan")?;
                writeln!(out, "dims {} {}", l.d_in(), l.d_out())?;
                let basis = l.basis();
                let kind = match basis.kind() {
                    BasisKind::Gaussian => "gaussian",
                    BasisKind::ConstantOne => "constant_one",
                };
                let (lo, hi) = basis.range();
                writeln!(out, "basis {kind} {} {} {}", basis.len(), lo, hi)?;
                writeln!(out, "sigma {}", basis.sigma())?;
                writeln!(out, "base {} {}", u8::from(l.use_base()), u8::from(l.base_nonlinear()))?;
                let (d_in, k, d_out) = l.gamma().shape();
                writeln!(out, "gamma {d_in} {k} {d_out}")?;
                write_floats(out, l.gamma().data())?;
                writeln!(out, "beta {d_in} {k} {d_out}")?;
                write_floats(out, l.beta().data())?;
                if let Some(w) = l.base_weight() {
                    writeln!(out, "base_weight {} {}", w.rows(), w.cols())?;
                    write_floats(out, w.data())?;
                    let b = l.base_bias().unwrap();
                    writeln!(out, "base_bias {}", b.len())?;
                    write_floats(out, b)?;
                }
            }
            Layer::Dense(l) => {
                writeln!(out, "layer dense")?;
                writeln!(out, "dims {} {}", l.d_in(), l.d_out())?;
                writeln!(out, "weight {} {}", l.d_in(), l.d_out())?;
                write_floats(out, l.weight().data())?;
                writeln!(out, "bias {}", l.bias().len())?;
                write_floats(out, l.bias())?;
            }
            Layer::Relu => {
                writeln!(out, "layer relu")?;
            }
            Layer::Squash(s) => {
                writeln!(out, "layer squash")?;
                writeln!(
                    out,
                    "range {} {}",
                    s.center() - s.half_width(),
                    s.center() + s.half_width()
                )?;
            }
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

fn write_floats(out: &mut impl Write, vals: &[f64]) -> Result<()> {
    for chunk in vals.chunks(FLOATS_PER_LINE) {
        let line: Vec<String> = chunk.iter().map(f64::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn save_model(model: &SequentialModel<f64>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_model(model, &mut out)?;
    out.flush()?;
    Ok(())
}

struct LineReader<R> {
    inner: R,
    line_no: usize,
}

impl<R: BufRead> LineReader<R> {
    fn next(&mut self) -> Result<String> {
        loop {
            let mut buf = String::new();
            let n = self.inner.read_line(&mut buf)?;
            self.line_no += 1;
            if n == 0 {
                return Err(self.err("unexpected end of file"));
            }
            let trimmed = buf.trim();
            if !trimmed.is_empty() {
                return Ok(trimmed.to_string());
            }
        }
    }

    fn err(&self, detail: impl Into<String>) -> Error {
        Error::CheckpointFormat {
            line: self.line_no,
            detail: detail.into(),
        }
    }

    fn expect_fields(&mut self, key: &str, count: usize) -> Result<Vec<String>> {
        let line = self.next()?;
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap_or("");
        if head != key {
            return Err(self.err(format!("expected `{key}`, found `{head}`")));
        }
        let fields: Vec<String> = parts.map(str::to_string).collect();
        if fields.len() != count {
            return Err(self.err(format!(
                "`{key}` expects {count} fields, found {}",
                fields.len()
            )));
        }
        Ok(fields)
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("cannot parse `{s}`")))
    }

    fn read_floats(&mut self, count: usize) -> Result<Vec<f64>> {
        let mut vals = Vec::with_capacity(count);
        while vals.len() < count {
            let line = self.next()?;
            for tok in line.split_whitespace() {
                if vals.len() == count {
                    return Err(self.err("too many values in float block"));
                }
                vals.push(self.parse::<f64>(tok)?);
            }
        }
        Ok(vals)
    }
}

/// Read a model from a reader in the checkpoint format.
pub fn read_model(reader: impl std::io::Read) -> Result<SequentialModel<f64>> {
    let mut r = LineReader {
        inner: BufReader::new(reader),
        line_no: 0,
    };
    let header = r.next()?;
    if header != HEADER {
        return Err(r.err(format!("bad header `{header}`, expected `{HEADER}`")));
    }
    let n_layers: usize = {
        let f = r.expect_fields("layers", 1)?;
        r.parse(&f[0])?
    };
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let f = r.expect_fields("layer", 1)?;
        match f[0].as_str() {
            "mjkan" => {
                let dims = r.expect_fields("dims", 2)?;
                let d_in: usize = r.parse(&dims[0])?;
                let d_out: usize = r.parse(&dims[1])?;
                let bf = r.expect_fields("basis", 4)?;
                let k: usize = r.parse(&bf[1])?;
                let lo: f64 = r.parse(&bf[2])?;
                let hi: f64 = r.parse(&bf[3])?;
                let sigma_f = r.expect_fields("sigma", 1)?;
                let sigma: f64 = r.parse(&sigma_f[0])?;
                let basis = match bf[0].as_str() {
                    "gaussian" => {
                        // reconstruct with the stored sigma via overlap = sigma/spacing
                        let spacing = if k == 1 { (hi - lo) / 2.0 } else { (hi - lo) / (k - 1) as f64 };
                        RbfBasis::new_uniform(k, lo, hi, sigma / spacing)
                            .map_err(|e| r.err(e.to_string()))?
                    }
                    "constant_one" => {
                        RbfBasis::constant_one(k, lo, hi).map_err(|e| r.err(e.to_string()))?
                    }
                    other => return Err(r.err(format!("unknown basis kind `{other}`"))),
                };
                let base_f = r.expect_fields("base", 2)?;
                let use_base = base_f[0] == "1";
                let base_nonlinear = base_f[1] == "1";
                let gshape = r.expect_fields("gamma", 3)?;
                let gs: [usize; 3] = [r.parse(&gshape[0])?, r.parse(&gshape[1])?, r.parse(&gshape[2])?];
                if gs != [d_in, k, d_out] {
                    return Err(r.err("gamma shape disagrees with layer dims"));
                }
                let gamma = Tensor3::from_vec(gs[0], gs[1], gs[2], r.read_floats(gs[0] * gs[1] * gs[2])?)
                    .map_err(|e| r.err(e.to_string()))?;
                let bshape = r.expect_fields("beta", 3)?;
                let bs: [usize; 3] = [r.parse(&bshape[0])?, r.parse(&bshape[1])?, r.parse(&bshape[2])?];
                if bs != [d_in, k, d_out] {
                    return Err(r.err("beta shape disagrees with layer dims"));
                }
                let beta = Tensor3::from_vec(bs[0], bs[1], bs[2], r.read_floats(bs[0] * bs[1] * bs[2])?)
                    .map_err(|e| r.err(e.to_string()))?;
                let (base_weight, base_bias) = if use_base {
                    let wshape = r.expect_fields("base_weight", 2)?;
                    let wr: usize = r.parse(&wshape[0])?;
                    let wc: usize = r.parse(&wshape[1])?;
                    let w = Matrix::from_vec(wr, wc, r.read_floats(wr * wc)?)
                        .map_err(|e| r.err(e.to_string()))?;
                    let bshape = r.expect_fields("base_bias", 1)?;
                    let bl: usize = r.parse(&bshape[0])?;
                    let b = r.read_floats(bl)?;
                    (Some(w), Some(b))
                } else {
                    (None, None)
                };
                let mut layer =
                    MjkanLayer::from_parts(basis, gamma, beta, base_weight, base_bias, base_nonlinear)
                        .map_err(|e| r.err(e.to_string()))?;
                layer.set_base_nonlinear(base_nonlinear);
                layers.push(Layer::Mjkan(layer));
            }
            "dense" => {
                let dims = r.expect_fields("dims", 2)?;
                let d_in: usize = r.parse(&dims[0])?;
                let d_out: usize = r.parse(&dims[1])?;
                let wshape = r.expect_fields("weight", 2)?;
                let wr: usize = r.parse(&wshape[0])?;
                let wc: usize = r.parse(&wshape[1])?;
                if (wr, wc) != (d_in, d_out) {
                    return Err(r.err("weight shape disagrees with layer dims"));
                }
                let w = Matrix::from_vec(wr, wc, r.read_floats(wr * wc)?)
                    .map_err(|e| r.err(e.to_string()))?;
                let bshape = r.expect_fields("bias", 1)?;
                let bl: usize = r.parse(&bshape[0])?;
                let b = r.read_floats(bl)?;
                layers.push(Layer::Dense(
                    DenseLayer::from_parts(w, b).map_err(|e| r.err(e.to_string()))?,
                ));
            }
            "relu" => layers.push(Layer::Relu),
            "squash" => {
                let rf = r.expect_fields("range", 2)?;
                let lo: f64 = r.parse(&rf[0])?;
                let hi: f64 = r.parse(&rf[1])?;
                layers.push(Layer::Squash(
                    Squash::new(lo, hi).map_err(|e| r.err(e.to_string()))?,
                ));
            }
            other => return Err(r.err(format!("unknown layer kind `{other}`"))),
        }
    }
    let end = r.next()?;
    if end != "end" {
        return Err(r.err(format!("expected `end`, found `{end}`")));
    }
    SequentialModel::new(layers)
}

pub fn load_model(path: &Path) -> Result<SequentialModel<f64>> {
    read_model(File::open(path)?)
}
