use chromashape::analysis::{baseline_report, RankValidationConfig};
use chromashape::catalog::{designer_tool_palettes, load_default_pools};
use chromashape::evidence::{
    ingest_trials, write_trial_log, Axis, BinSelector, Evidence, EvidenceSource, PoolDims,
};
use chromashape::optimizer::{nearest_representative, Constraints, Encoding, Model, Palette, PaletteRecord};
use chromashape::stimgen::{gen_stimulus, render_svg, MarkStyle, StimulusSpec};
use chromashape::synthetic::LatentModel;
use chromashape::evidence::Marker;

fn dims() -> PoolDims {
    PoolDims { colors: 39, shapes: 39 }
}

#[test]
fn trial_log_round_trip_feeds_evidence() {
    let latent = LatentModel::new(dims(), 4);
    let trials = latent.sample_trials(3000, 9);
    let mut buf = Vec::new();
    write_trial_log(&mut buf, &trials).unwrap();
    let log = ingest_trials(&buf[..], "mem", &dims()).unwrap();
    assert_eq!(log.records, trials);
    assert!(log.warnings.is_empty());

    let ev = Evidence::from_trials(&log.records, dims());
    for axis in Axis::ALL {
        assert!(ev.has_axis(axis));
    }
    let back = Evidence::from_json(ev.to_json()).unwrap();
    assert_eq!(back.pairs(Axis::Color, BinSelector::All), ev.pairs(Axis::Color, BinSelector::All));
    let m = ev.matrix(Axis::Color, BinSelector::Medium).unwrap();
    assert!(m.total_trials() > 0);
}

#[test]
fn generate_render_and_serialize() {
    let (pool, catalog) = load_default_pools().unwrap();
    let latent = LatentModel::new(dims(), 21);
    let model = Model::new(&latent, &pool, &catalog).unwrap();
    let mut constraints = Constraints::default();
    constraints.required_colors.insert(3);
    let ranked = model.generate(Encoding::Redundant, 5, &constraints, 3, 8).unwrap();
    assert_eq!(ranked.len(), 3);
    assert!(ranked.windows(2).all(|w| w[0].score >= w[1].score));
    assert!(ranked.iter().all(|r| r.palette.color_ids().contains(&3)));

    let record = PaletteRecord::new(&ranked[0], &pool, &catalog).unwrap();
    let json = serde_json::to_string(&record).unwrap();
    let again: PaletteRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(again, record);
    assert!(record.entries.iter().all(|e| e.hex.is_some() && e.shape.is_some()));

    let marks = MarkStyle::for_palette(&ranked[0].palette, &pool).unwrap();
    let stim = gen_stimulus(&StimulusSpec::new(5, 1), &marks).unwrap();
    let svg = render_svg(&stim, &catalog).unwrap();
    assert_eq!(svg.matches(r#"class="mark""#).count(), 100);
}

#[test]
fn designer_palettes_map_onto_pool_for_baseline() {
    let (pool, catalog) = load_default_pools().unwrap();
    let latent = LatentModel::new(dims(), 5);
    let model = Model::new(&latent, &pool, &catalog).unwrap();
    let mut designer = Vec::new();
    for p in designer_tool_palettes() {
        let mut ids: Vec<u16> = Vec::new();
        for c in p.colors.iter().take(5) {
            let id = nearest_representative(c.to_lab(), &pool);
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        designer.push(Palette::colors(Encoding::ColorOnly, &ids).unwrap());
    }
    let generated: Vec<Palette> = (0..4)
        .map(|s| model.generate(Encoding::ColorOnly, 5, &Constraints::default(), 1, s).unwrap()[0].palette.clone())
        .collect();
    let groups = vec![("generated".to_string(), generated), ("designer".to_string(), designer)];
    let report = baseline_report(&groups, &model, &RankValidationConfig::default(), 1).unwrap();
    assert!(report[0].mean >= report[1].mean);
    assert!(report.iter().all(|g| g.ci_low <= g.mean && g.mean <= g.ci_high));
}

#[test]
fn unscoreable_palette_names_the_pair() {
    let (pool, catalog) = load_default_pools().unwrap();
    let trials = LatentModel::new(dims(), 1).sample_trials(30, 2);
    let ev = Evidence::from_trials(&trials, dims());
    let model = Model::new(&ev, &pool, &catalog).unwrap();
    let p = Palette::new(Encoding::ColorOnly, (0..10).map(Marker::color).collect()).unwrap();
    let err = model.score(&p).unwrap_err();
    assert!(matches!(err, chromashape::Error::MissingEvidence { .. }), "{err}");
}
