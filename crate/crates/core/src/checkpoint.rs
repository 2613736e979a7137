//! Self-describing text checkpoints.
//!
//! ```text
//! memchain-checkpoint 1
//! hidden 8
//! embed 8
//! chains event,sentiment,topic,free
//! bidirectional true
//! params 43
//! param gru.fwd.w_z 8 8
//! 0.1 -0.2 ...
//! ```
//!
//! Values use the shortest decimal form that parses back to the same `f64`,
//! so a save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{ChainRole, Model, ModelConfig};
use crate::tensor::Tensor;

const MAGIC: &str = "memchain-checkpoint";
const VERSION: u32 = 1;

pub fn to_string(model: &Model) -> String {
    let c = &model.config;
    let chains: Vec<&str> = c.chains.iter().map(|r| r.name()).collect();
    let mut out = format!(
        "{MAGIC} {VERSION}\nhidden {}\nembed {}\nchains {}\nbidirectional {}\nparams {}\n",
        c.hidden,
        c.embed,
        chains.join(","),
        c.bidirectional,
        model.params.len()
    );
    for (name, t) in model.params.iter() {
        let dims: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
        out.push_str(&format!("param {name} {}\n", dims.join(" ")));
        let values: Vec<String> = t.data().iter().map(|v| v.to_string()).collect();
        out.push_str(&values.join(" "));
        out.push('\n');
    }
    out
}

pub fn save(path: &Path, model: &Model) -> Result<()> {
    fs::write(path, to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text, &path.display().to_string())
}

pub fn from_str(text: &str, origin: &str) -> Result<Model> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::parse(origin, 0, format!("unexpected end of file, expected {what}")))
    };
    let (ln, header) = next("header")?;
    match header.split_once(' ') {
        Some((MAGIC, v)) if v.trim() == VERSION.to_string() => {}
        Some((MAGIC, v)) => return Err(Error::parse(origin, ln, format!("unsupported checkpoint version {v}"))),
        _ => return Err(Error::parse(origin, ln, "not a checkpoint file")),
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (ln, line) = next(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((ln, v.trim().to_string())),
            _ => Err(Error::parse(origin, ln, format!("expected `{key}`"))),
        }
    };
    let num = |(ln, v): (usize, String)| v.parse::<usize>().map_err(|e| Error::parse(origin, ln, e.to_string()));
    let hidden = num(field("hidden")?)?;
    let embed = num(field("embed")?)?;
    let (ln, chains) = field("chains")?;
    let chains = chains
        .split(',')
        .map(|c| c.parse::<ChainRole>().map_err(|e| Error::parse(origin, ln, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let (ln, bidi) = field("bidirectional")?;
    let bidirectional = bidi.parse::<bool>().map_err(|e| Error::parse(origin, ln, e.to_string()))?;
    let count = num(field("params")?)?;
    let config = ModelConfig {
        hidden,
        embed,
        chains,
        bidirectional,
    };
    let mut model = Model::zeros(config)?;
    if count != model.params.len() {
        return Err(Error::parse(
            origin,
            0,
            format!("checkpoint has {count} params, layout needs {}", model.params.len()),
        ));
    }
    for i in 0..count {
        let (ln, line) = next("param header")?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("param") {
            return Err(Error::parse(origin, ln, "expected `param`"));
        }
        let name = parts.next().ok_or_else(|| Error::parse(origin, ln, "missing param name"))?;
        let shape = parts
            .map(|d| d.parse::<usize>().map_err(|e| Error::parse(origin, ln, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let expected = &model.params.names()[i];
        if name != expected {
            return Err(Error::parse(origin, ln, format!("expected param `{expected}`, found `{name}`")));
        }
        let (vln, values) = next("param values")?;
        let data = values
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|e| Error::parse(origin, vln, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let t = Tensor::new(shape, data).map_err(|e| Error::parse(origin, vln, e.to_string()))?;
        let slot = &mut model.params.tensors_mut()[i];
        if slot.shape() != t.shape() {
            return Err(Error::parse(
                origin,
                ln,
                format!("{name}: expected shape {:?}, found {:?}", slot.shape(), t.shape()),
            ));
        }
        *slot = t;
    }
    Ok(model)
}
