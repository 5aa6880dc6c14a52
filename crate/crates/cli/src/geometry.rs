//! Subcommands over the correlation metric: distance, mds, dendro, mst
//! and the combined sector pipeline.

use crate::analysis::render;
use crate::config;
use crate::inputs::panel_prologue;
use crate::jsonnum;
use crate::meta::{write_run_meta, RunMeta};
use crate::{CliError, DendroArgs, DistanceArgs, MdsArgs, MstArgs, SectorArgs};
use mesonet_core::netgeo::{self, DistanceMatrix, GeometryOptions};
use mesonet_core::panel::ReturnPanel;
use mesonet_core::spectral::CorrelationMatrix;
use serde_json::json;

fn metric(panel: &ReturnPanel) -> Result<(CorrelationMatrix, DistanceMatrix), CliError> {
    let c = CorrelationMatrix::from_panel(panel)?;
    let d = DistanceMatrix::from_correlation(&c);
    Ok((c, d))
}

pub fn distance(args: DistanceArgs) -> Result<(), CliError> {
    let mut run = panel_prologue(&args.common)?;
    let (_, d) = metric(&run.panel)?;
    run.out.write("distance.csv", &render(|b| d.write_csv(b)))?;
    write_run_meta(
        &mut run.out,
        &RunMeta {
            command: "distance",
            parameters: run.base_parameters.into(),
            inputs: run.digests,
            notes: vec![],
        },
    )
}

pub fn mds(args: MdsArgs) -> Result<(), CliError> {
    let mut run = panel_prologue(&args.common)?;
    let dims = args.dims.or(run.cfg.dims).unwrap_or(2);
    let refine = args.refine || run.cfg.refine.unwrap_or(false);
    let groups_path = args.groups.or_else(|| run.cfg.groups.clone());
    let classes = match &groups_path {
        Some(path) => {
            let (classes, digest) = crate::inputs::group_classes(path, run.panel.tickers())?;
            run.digests.push(digest);
            Some(classes)
        }
        None => None,
    };
    let (_, d) = metric(&run.panel)?;
    let embedding = netgeo::mds(&d, dims, refine)?;

    run.out.write("mds.csv", &render(|b| embedding.write_csv(b)))?;
    run.out.write("mds.svg", &render(|b| embedding.write_svg(b, classes.as_deref())))?;
    run.out.write("mds_diagnostics.json", &jsonnum::to_bytes(&embedding.diagnostics_json()))?;

    run.base_parameters.insert("dims".into(), json!(dims));
    run.base_parameters.insert("refine".into(), json!(refine));
    run.base_parameters.insert("groups".into(), json!(groups_path));
    write_run_meta(
        &mut run.out,
        &RunMeta {
            command: "mds",
            parameters: run.base_parameters.into(),
            inputs: run.digests,
            notes: vec![],
        },
    )
}

pub fn dendro(args: DendroArgs) -> Result<(), CliError> {
    let mut run = panel_prologue(&args.common)?;
    let (_, d) = metric(&run.panel)?;
    let tree = netgeo::ward_dendrogram(&d)?;
    let mut newick = tree.to_newick();
    newick.push('\n');
    run.out.write("dendrogram.newick", newick.as_bytes())?;
    write_run_meta(
        &mut run.out,
        &RunMeta {
            command: "dendro",
            parameters: run.base_parameters.into(),
            inputs: run.digests,
            notes: vec![],
        },
    )
}

pub fn mst(args: MstArgs) -> Result<(), CliError> {
    let mut run = panel_prologue(&args.common)?;
    let algorithm_label =
        args.algorithm.clone().or_else(|| run.cfg.algorithm.clone()).unwrap_or_else(|| "kruskal".into());
    let algorithm = config::parse_algorithm(&algorithm_label)?;
    let (_, d) = metric(&run.panel)?;
    let tree = netgeo::minimum_spanning_tree(&d, algorithm);

    run.out.write("mst.dot", &render(|b| tree.write_dot(b)))?;
    run.out.write("mst_edges.csv", &render(|b| tree.write_edges_csv(b)))?;

    run.base_parameters.insert("algorithm".into(), json!(algorithm_label));
    write_run_meta(
        &mut run.out,
        &RunMeta {
            command: "mst",
            parameters: run.base_parameters.into(),
            inputs: run.digests,
            notes: vec![],
        },
    )
}

pub fn sector(args: SectorArgs) -> Result<(), CliError> {
    let mut run = panel_prologue(&args.common)?;
    let dims = args.dims.or(run.cfg.dims).unwrap_or(2);
    let refine = args.refine || run.cfg.refine.unwrap_or(false);
    let algorithm_label =
        args.algorithm.clone().or_else(|| run.cfg.algorithm.clone()).unwrap_or_else(|| "kruskal".into());
    let algorithm = config::parse_algorithm(&algorithm_label)?;
    let clusters = args.clusters.or(run.cfg.clusters);

    let opts = GeometryOptions { dims, refine, algorithm };
    let g = netgeo::sector_pipeline(&run.panel, None, &opts)?;
    let groups = clusters.map(|k| g.dendrogram.cut(k)).transpose()?;

    run.out.write("correlation.csv", &render(|b| g.correlation.write_csv(b)))?;
    run.out.write("distance.csv", &render(|b| g.distance.write_csv(b)))?;
    run.out.write("mds.csv", &render(|b| g.embedding.write_csv(b)))?;
    run.out
        .write("mds.svg", &render(|b| g.embedding.write_svg(b, groups.as_deref())))?;
    let mut newick = g.dendrogram.to_newick();
    newick.push('\n');
    run.out.write("dendrogram.newick", newick.as_bytes())?;
    run.out.write("mst.dot", &render(|b| g.tree.write_dot(b)))?;
    run.out.write("mst_edges.csv", &render(|b| g.tree.write_edges_csv(b)))?;
    // Digest index over the seven data files above.
    let manifest = run.out.manifest_csv();
    run.out.write("manifest.csv", manifest.as_bytes())?;

    run.base_parameters.insert("dims".into(), json!(dims));
    run.base_parameters.insert("refine".into(), json!(refine));
    run.base_parameters.insert("algorithm".into(), json!(algorithm_label));
    run.base_parameters.insert("clusters".into(), json!(clusters));
    write_run_meta(
        &mut run.out,
        &RunMeta {
            command: "sector",
            parameters: run.base_parameters.into(),
            inputs: run.digests,
            notes: vec![],
        },
    )
}

