use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bdrkit_core::{gen_target_bd, inject_corruption, BlockSpec, CorruptionSpec, Type2Outlier};
use serde::Serialize;

use crate::args::GenArgs;
use crate::{json, CliError};

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    block: &'a BlockSpec,
    corruption: &'a CorruptionSpec,
    seed: u64,
    affinity: String,
    labels: String,
}

fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|e| CliError::Parse(format!("'{x}' is not a number: {e}")))
        })
        .collect()
}

fn parse_type2(s: &str) -> Result<Type2Outlier, CliError> {
    let (position, coefficients) = s
        .split_once(':')
        .ok_or_else(|| CliError::Parse(format!("type II outlier '{s}' must look like POSITION:c1,c2,...")))?;
    Ok(Type2Outlier {
        position: position
            .trim()
            .parse()
            .map_err(|e| CliError::Parse(format!("bad position '{position}': {e}")))?,
        coefficients: parse_floats(coefficients)?,
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn run(args: &GenArgs) -> Result<(), CliError> {
    let spec = BlockSpec::new(args.sizes.clone(), args.within.clone()).with_jitter(args.jitter);
    let corruption = CorruptionSpec {
        type1_count: args.type1,
        type2: args.type2.iter().map(|s| parse_type2(s)).collect::<Result<_, _>>()?,
        group_sim: match &args.group {
            Some(g) => g.split(';').map(parse_floats).collect::<Result<_, _>>()?,
            None => Vec::new(),
        },
        jitter: args.corruption_jitter,
    };
    let target = gen_target_bd(&spec, args.seed)?;
    let out = inject_corruption(&target, &spec, &corruption, args.seed)?;

    let mut affinity = String::new();
    for row in out.graph.affinity().row_iter() {
        let fields: Vec<String> = row.iter().map(|x| json::format_float(*x)).collect();
        writeln!(affinity, "{}", fields.join(",")).expect("writing to a String");
    }
    let labels: String = out.truth_labels(&corruption).iter().map(|l| format!("{l}\n")).collect();

    let affinity_path = with_suffix(&args.out, ".affinity.csv");
    let labels_path = with_suffix(&args.out, ".labels.csv");
    let file_name = |p: &Path| {
        p.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let sidecar = Sidecar {
        block: &spec,
        corruption: &corruption,
        seed: args.seed,
        affinity: file_name(&affinity_path),
        labels: file_name(&labels_path),
    };
    crate::write_file(&affinity_path, &affinity)?;
    crate::write_file(&labels_path, &labels)?;
    crate::write_file(&with_suffix(&args.out, ".json"), &json::to_string(&sidecar)?)?;
    Ok(())
}
