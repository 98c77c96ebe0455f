use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rankfield::csr::{fit_csr_models, pattern_diagram, power_study, CsrFitConfig, CsrModel, CsrModelHeader};
use rankfield::fpca::fit;
use rankfield::io::{
    read_diagram, read_points, read_rank_function, write_atomic, write_diagram, write_gnuplot_matrix, write_grid_csv,
    write_points, write_rank_function, write_scores, PcaModelHeader,
};
use rankfield::pointproc::ProcessSpec;
use rankfield::rankspace::mean;
use rankfield::{rank_from_diagram, PointPattern, RankFunction, WeightFunction, Window};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::CsrFitSection;
use crate::{CliError, Command, Settings};

type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn dispatch(command: &Command, s: &Settings) -> Result<Value> {
    match command {
        Command::Simulate { spec, count, out } => simulate(s, spec.as_deref(), *count, out.as_deref()),
        Command::Persist { inputs, out } => persist(inputs, out),
        Command::Rank { inputs, out, gnuplot } => rank(s, inputs, out, *gnuplot),
        Command::Mean { inputs, out, gnuplot } => mean_cmd(inputs, out, *gnuplot),
        Command::Pca { inputs, components, out, gnuplot } => pca(inputs, *components, out, *gnuplot),
        Command::CsrFit { n_mean, n_null, n_points, p_level, out } => {
            let flags = CsrFitSection {
                n_mean: *n_mean,
                n_null: *n_null,
                n_points: *n_points,
                p_level: *p_level,
                out: out.clone(),
            };
            csr_fit(s, &flags)
        }
        Command::CsrTest { model, inputs, out } => csr_test(model, inputs, out),
        Command::Power { n_test, n_points, out } => power(s, *n_test, *n_points, out.as_deref()),
        Command::Subsample { input, cube, count, radius, out } => subsample(input, *cube, *count, *radius, out),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    write_atomic(path, contents.as_bytes()).map_err(|e| CliError::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// One output name per input; two inputs with the same stem would overwrite each other.
fn output_paths(inputs: &[PathBuf], out: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut seen = BTreeSet::new();
    inputs
        .iter()
        .map(|p| {
            let s = stem(p);
            if !seen.insert(s.clone()) {
                return Err(CliError::Input {
                    path: p.display().to_string(),
                    source: rankfield::Error::InvalidArgument(format!("duplicate input name '{s}'")),
                });
            }
            Ok(out.join(format!("{s}.{ext}")))
        })
        .collect()
}

/// Runs `f` over `items` in parallel and returns the results in input order,
/// or the error of the first failing item.
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(usize, &T) -> Result<U> + Sync) -> Result<Vec<U>> {
    let results: Vec<Result<U>> = items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect();
    results.into_iter().collect()
}

fn paths_json(paths: &[PathBuf]) -> Value {
    json!(paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>())
}

fn read_rank(path: &Path) -> Result<(RankFunction, WeightFunction)> {
    read_rank_function(&read_text(path)?).map_err(|e| CliError::at(path, e))
}

fn read_ranks(inputs: &[PathBuf]) -> Result<(Vec<RankFunction>, WeightFunction)> {
    let loaded = par_map(inputs, |_, p| read_rank(p))?;
    let (first_f, first_phi) = &loaded[0];
    for ((f, phi), path) in loaded.iter().zip(inputs) {
        if f.grid() != first_f.grid() || f.dim() != first_f.dim() || phi != first_phi {
            return Err(CliError::at(path, rankfield::Error::GridMismatch));
        }
    }
    let phi = *first_phi;
    Ok((loaded.into_iter().map(|(f, _)| f).collect(), phi))
}

fn simulate(s: &Settings, spec: Option<&str>, count: Option<usize>, out: Option<&Path>) -> Result<Value> {
    let section = s.config.simulate.as_ref();
    let spec: ProcessSpec = match spec {
        Some(text) => {
            let spec: ProcessSpec = serde_json::from_str(text).map_err(|e| CliError::Config(format!("--spec: {e}")))?;
            spec.validate().map_err(|e| CliError::Config(format!("--spec: {e}")))?;
            spec
        }
        None => section.map(|c| c.spec.clone()).ok_or_else(|| CliError::Config("no process spec given".into()))?,
    };
    let count = count.or(section.map(|c| c.count)).ok_or_else(|| CliError::Config("no pattern count given".into()))?;
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| section.and_then(|c| c.out.clone()))
        .ok_or_else(|| CliError::Config("no output directory given".into()))?;
    let spec_json = serde_json::to_string(&spec).expect("spec serializes");
    info!("simulating {count} patterns of {spec_json} from seed {}", s.seed);

    let indices: Vec<usize> = (0..count).collect();
    let paths = par_map(&indices, |_, &i| {
        let seed = s.seed.wrapping_add(i as u64);
        let pattern = spec.generate(seed).map_err(|source| CliError::Generator { index: i, source })?;
        let path = out.join(format!("pattern_{i}.csv"));
        write_file(&path, &format!("# seed {seed}\n# spec {spec_json}\n{}", write_points(&pattern)))?;
        Ok(path)
    })?;
    Ok(json!({
        "command": "simulate",
        "count": count,
        "seed": s.seed,
        "spec": spec,
        "files": paths.len(),
        "out": out.display().to_string(),
    }))
}

fn persist(inputs: &[PathBuf], out: &Path) -> Result<Value> {
    let outputs = output_paths(inputs, out, "csv")?;
    let counts = par_map(inputs, |i, path| {
        let pattern = read_points(&read_text(path)?).map_err(|e| CliError::at(path, e))?;
        let diagram = pattern_diagram(&pattern).map_err(|e| CliError::at(path, e))?;
        write_file(&outputs[i], &format!("# source {}\n{}", file_name(path), write_diagram(&diagram)))?;
        Ok(diagram.len())
    })?;
    Ok(json!({
        "command": "persist",
        "inputs": inputs.len(),
        "diagram_points": counts.iter().sum::<usize>(),
        "outputs": paths_json(&outputs),
    }))
}

fn rank(s: &Settings, inputs: &[PathBuf], out: &Path, gnuplot: bool) -> Result<Value> {
    let dim = s.require_dim()?;
    let outputs = output_paths(inputs, out, "csv")?;
    par_map(inputs, |i, path| {
        let diagram = read_diagram(&read_text(path)?).map_err(|e| CliError::at(path, e))?;
        let f = rank_from_diagram(&diagram, dim, s.grid);
        write_file(&outputs[i], &write_rank_function(&f, &s.phi, &[("source", file_name(path))]))?;
        if gnuplot {
            write_file(&outputs[i].with_extension("matrix"), &write_gnuplot_matrix(&s.grid, f.values()))?;
        }
        Ok(())
    })?;
    Ok(json!({
        "command": "rank",
        "inputs": inputs.len(),
        "dim": dim,
        "grid": s.grid.to_string(),
        "phi": s.phi.to_string(),
        "outputs": paths_json(&outputs),
    }))
}

fn mean_cmd(inputs: &[PathBuf], out: &Path, gnuplot: bool) -> Result<Value> {
    let (fs, phi) = read_ranks(inputs)?;
    let avg = mean(&fs)?;
    write_file(out, &write_rank_function(&avg, &phi, &[("n_functions", fs.len().to_string())]))?;
    let mut outputs = vec![out.to_path_buf()];
    if gnuplot {
        let matrix = out.with_extension("matrix");
        write_file(&matrix, &write_gnuplot_matrix(avg.grid(), avg.values()))?;
        outputs.push(matrix);
    }
    Ok(json!({ "command": "mean", "inputs": inputs.len(), "outputs": paths_json(&outputs) }))
}

fn pca(inputs: &[PathBuf], components: Option<usize>, out: &Path, gnuplot: bool) -> Result<Value> {
    let (fs, phi) = read_ranks(inputs)?;
    let r = components.unwrap_or(fs.len().saturating_sub(1));
    let model = fit(&fs, &phi, r)?;
    let mut outputs = vec![out.join("model.json"), out.join("mean.csv"), out.join("scores.csv")];
    write_file(&outputs[0], &PcaModelHeader::of(&model).to_json())?;
    write_file(&outputs[1], &write_rank_function(&model.mean, &phi, &[("n_functions", fs.len().to_string())]))?;
    let ids: Vec<String> = inputs.iter().map(|p| stem(p)).collect();
    write_file(&outputs[2], &write_scores(&ids, &model.scores))?;
    for (j, (z, lambda)) in model.components.iter().zip(&model.eigenvalues).enumerate() {
        let path = out.join(format!("component_{}.csv", j + 1));
        let extra = [("component", (j + 1).to_string()), ("eigenvalue", format!("{lambda:?}"))];
        write_file(&path, &write_grid_csv(&model.grid, model.dim, &phi, &z.values, &extra))?;
        if gnuplot {
            let matrix = path.with_extension("matrix");
            write_file(&matrix, &write_gnuplot_matrix(&model.grid, &z.values))?;
            outputs.push(matrix);
        }
        outputs.push(path);
    }
    Ok(json!({
        "command": "pca",
        "inputs": inputs.len(),
        "components": model.n_components(),
        "explained_variance_ratio": model.explained_variance_ratio,
        "outputs": paths_json(&outputs),
    }))
}

fn fit_config(flags: &CsrFitSection, file: Option<&CsrFitSection>, seed: u64) -> CsrFitConfig {
    let pick = |f: fn(&CsrFitSection) -> Option<usize>, default| f(flags).or(file.and_then(f)).unwrap_or(default);
    CsrFitConfig {
        n_mean: pick(|c| c.n_mean, 300),
        n_null: pick(|c| c.n_null, 200),
        n_points: pick(|c| c.n_points, 100),
        p_level: flags.p_level.or(file.and_then(|c| c.p_level)).unwrap_or(0.05),
        seed,
    }
}

fn model_dims(s: &Settings) -> Vec<usize> {
    s.dim.map_or(vec![0, 1], |k| vec![k])
}

fn write_models(models: &[CsrModel], out: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for m in models {
        let header = out.join(format!("csr_dim{}.json", m.dim));
        let mean = out.join(format!("csr_dim{}_mean.csv", m.dim));
        write_file(&header, &CsrModelHeader::of(m).to_json())?;
        let extra = [("cutoff", format!("{:?}", m.cutoff)), ("seed", m.seed.to_string())];
        write_file(&mean, &write_rank_function(&m.mean, &m.phi, &extra))?;
        paths.extend([header, mean]);
    }
    Ok(paths)
}

fn csr_fit(s: &Settings, flags: &CsrFitSection) -> Result<Value> {
    let file = s.config.csr_fit.as_ref();
    let out = flags
        .out
        .clone()
        .or_else(|| file.and_then(|c| c.out.clone()))
        .ok_or_else(|| CliError::Config("no output directory given".into()))?;
    let config = fit_config(flags, file, s.seed);
    flags_check(&config)?;
    info!("fitting CSR models {config:?}");
    let models = fit_csr_models(&config, &model_dims(s), s.grid, s.phi)?;
    let outputs = write_models(&models, &out)?;
    Ok(json!({
        "command": "csr-fit",
        "config": config,
        "cutoffs": models.iter().map(|m| m.cutoff).collect::<Vec<_>>(),
        "outputs": paths_json(&outputs),
    }))
}

fn flags_check(config: &CsrFitConfig) -> Result<()> {
    if !(config.p_level > 0.0 && config.p_level < 1.0) {
        return Err(CliError::Config(format!("p_level must lie in (0, 1), got {}", config.p_level)));
    }
    if config.n_mean < 2 || config.n_null < 2 {
        return Err(CliError::Config("n_mean and n_null must be at least 2".into()));
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<CsrModel> {
    let header = CsrModelHeader::from_json(&read_text(path)?).map_err(|e| CliError::at(path, e))?;
    let mean_path = path.with_file_name(format!("{}_mean.csv", stem(path)));
    let (mean, phi) = read_rank(&mean_path)?;
    if phi.to_string() != header.phi {
        return Err(CliError::at(&mean_path, rankfield::Error::GridMismatch));
    }
    header.into_model(mean).map_err(|e| CliError::at(path, e))
}

fn csr_test(model_path: &Path, inputs: &[PathBuf], out: &Path) -> Result<Value> {
    let model = load_model(model_path)?;
    let outcomes = par_map(inputs, |_, path| {
        let (f, phi) = read_rank(path)?;
        if phi != model.phi {
            return Err(CliError::at(path, rankfield::Error::GridMismatch));
        }
        model.test_rank(&f).map_err(|e| CliError::at(path, e))
    })?;
    let mut csv = format!("# model {}\ninput,distance_sq,cutoff,reject\n", file_name(model_path));
    for (path, o) in inputs.iter().zip(&outcomes) {
        csv.push_str(&format!("{},{:?},{:?},{}\n", file_name(path), o.distance_sq, model.cutoff, o.reject));
    }
    write_file(out, &csv)?;
    Ok(json!({
        "command": "csr-test",
        "inputs": inputs.len(),
        "rejected": outcomes.iter().filter(|o| o.reject).count(),
        "dim": model.dim,
        "outputs": [out.display().to_string()],
    }))
}

fn power(s: &Settings, n_test: Option<usize>, n_points: Option<usize>, out: Option<&Path>) -> Result<Value> {
    let section = s.config.power.clone().unwrap_or_default();
    let out = out
        .map(Path::to_path_buf)
        .or(section.out.clone())
        .ok_or_else(|| CliError::Config("no output directory given".into()))?;
    let n_test = n_test.or(section.n_test).unwrap_or(100);
    let flags = CsrFitSection { n_points, ..Default::default() };
    let config = fit_config(&flags, section.fit.as_ref(), s.seed);
    flags_check(&config)?;
    let specs = section.specs.clone().unwrap_or_else(|| ProcessSpec::power_study_models(config.n_points));
    if specs.is_empty() {
        return Err(CliError::Config("power.specs is empty".into()));
    }
    info!("power study: {} models x {n_test} patterns, fit {config:?}", specs.len());
    let models = fit_csr_models(&config, &model_dims(s), s.grid, s.phi)?;
    // Test patterns use a different base seed from the fit.
    let table = power_study(&specs, n_test, &models, s.seed.wrapping_add(1))?;
    let mut outputs = vec![out.join("power.csv"), out.join("power.txt")];
    write_file(&outputs[0], &table.to_csv())?;
    write_file(&outputs[1], &table.to_text())?;
    outputs.extend(write_models(&models, &out)?);
    Ok(json!({
        "command": "power",
        "n_test": n_test,
        "models": table.models,
        "counts": table.counts,
        "outputs": paths_json(&outputs),
    }))
}

fn subsample(input: &Path, edge: f64, count: usize, radius: f64, out: &Path) -> Result<Value> {
    if !(edge > 0.0 && edge.is_finite()) || !(radius > 0.0 && radius.is_finite()) || count == 0 {
        return Err(CliError::Config("--cube and --radius must be positive and --count at least 1".into()));
    }
    let pattern = read_points(&read_text(input)?).map_err(|e| CliError::at(input, e))?;
    let w = pattern.window();
    let d = pattern.dim();
    let per_axis: Vec<usize> =
        (0..d).map(|a| ((w.max[a] - w.min[a]) / edge * (1.0 + 1e-12)).floor() as usize).collect();
    let total: usize = per_axis.iter().product();
    if count > total {
        return Err(CliError::at(
            input,
            rankfield::Error::InvalidArgument(format!("window holds only {total} disjoint cubes of edge {edge}")),
        ));
    }
    let mut outputs = Vec::new();
    let mut sizes = Vec::new();
    for k in 0..count {
        // Evenly spread over the tiles in row-major order.
        let mut tile = k * total / count;
        let lo: Vec<f64> = per_axis
            .iter()
            .enumerate()
            .map(|(a, n)| {
                let t = tile % n;
                tile /= n;
                w.min[a] + t as f64 * edge
            })
            .collect();
        let points: Vec<Vec<f64>> = pattern
            .points()
            .filter(|p| p.iter().zip(&lo).all(|(x, l)| *x >= *l && *x < l + edge))
            .map(|p| p.iter().zip(&lo).map(|(x, l)| (x - l) / radius).collect())
            .collect();
        let window = Window::new(vec![0.0; d], vec![edge / radius; d])?;
        let cube = PointPattern::new(points, window).map_err(|e| CliError::at(input, e))?;
        let corner: Vec<String> = lo.iter().map(|x| format!("{x:?}")).collect();
        let path = out.join(format!("cube_{k}.csv"));
        let header = format!(
            "# source {}\n# cube corner {} edge {edge:?} radius {radius:?}\n",
            file_name(input),
            corner.join(" ")
        );
        write_file(&path, &(header + &write_points(&cube)))?;
        sizes.push(cube.len());
        outputs.push(path);
    }
    Ok(json!({
        "command": "subsample",
        "cubes": count,
        "points_per_cube": sizes,
        "outputs": paths_json(&outputs),
    }))
}
