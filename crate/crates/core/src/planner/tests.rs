use super::*;
use crate::geom::{pt_to_mm, Cmyk};
use crate::rules::{default_rules, Classification};
use crate::typeset::metrics::FontMetrics;

const TABLE3: &str = include_str!("../../tests/fixtures/table3.json");

fn long_stats() -> ContentStats {
    ContentStats {
        words: 73_330,
        images: 0,
        words_per_image: f64::INFINITY,
        book_type: BookType::LongReading,
        language: "en".into(),
    }
}

fn planned(seed: u64) -> DesignSettings {
    plan(&long_stats(), &default_rules(), &Constraints::default(), seed).unwrap()
}

/// Every rule a planned design must satisfy, checked field by field.
fn violations(s: &DesignSettings, rules: &RuleSet) -> Vec<String> {
    let mut v = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            v.push(what.to_string());
        }
    };
    let within = |x: f64, lo: f64, hi: f64| x >= lo - 1e-9 && x <= hi + 1e-9;
    check(
        rules.size_options.iter().any(|o| o.width == s.page.w && o.height == s.page.h),
        "page",
    );
    for m in [s.margins.top, s.margins.bottom] {
        check(within(m, 7.0, 15.0), "margins top/bottom");
    }
    for m in [s.margins.inside, s.margins.outside] {
        check(within(m, 7.0, 30.0), "margins inside/outside");
    }
    check(s.grid.columns >= 1, "columns");
    let block = s.page.w - s.margins.inside - s.margins.outside;
    let gutter = s.grid.gutter.unwrap_or(0.0);
    let width = (block - f64::from(s.grid.columns - 1) * gutter) / f64::from(s.grid.columns);
    check((width - s.grid.column_width).abs() < 1e-6, "column width");
    if s.grid.columns > 1 {
        check(within(gutter, 4.0, 6.0), "gutter");
    }
    check(within(s.body.size, 8.0, 12.0), "body size");
    check(within(s.body.leading / s.body.size, 1.15, 1.40), "leading ratio");
    check(s.grid.baseline == s.body.leading, "baseline");
    if s.body.alignment == Alignment::Justified {
        check(s.body.hyphenation, "justified without hyphenation");
    }
    if s.book_type == BookType::LongReading {
        check(
            matches!(s.body.alignment, Alignment::Justified | Alignment::Left),
            "long reading alignment",
        );
    }
    for t in &s.titles {
        check(matches!(t.alignment, Alignment::Left | Alignment::Centre), "title alignment");
    }
    match rules.pairing(&s.pairing) {
        Some(p) => {
            check(p.book_types.contains(&s.book_type), "pairing book type");
            if s.book_type == BookType::LongReading {
                check(p.body_class == Classification::Serif, "serif body");
            }
        }
        None => check(false, "pairing"),
    }
    check(rules.header_layout(&s.header_layout).is_some(), "header layout");
    check(rules.cover_colors.iter().any(|c| c.cmyk == s.cover_color), "cover colour");
    if let Some(c) = s.features.color {
        check(rules.cover_colors.iter().any(|p| p.cmyk == c), "feature colour");
    }
    if s.caption.placement == CaptionPlacement::AsideRotated {
        check(s.margins.outside >= 12.0, "aside caption margin");
    }
    v
}

fn with_column(mut s: DesignSettings, page: PageSize, inside: f64, column_pt: f64, size: f64) -> DesignSettings {
    s.page = page;
    s.margins.inside = inside;
    s.margins.outside = page.w - inside - pt_to_mm(column_pt);
    s.grid = grid_with(pt_to_mm(column_pt), 1, 5.0);
    s.body.size = size;
    s.body.alignment = Alignment::Left;
    s.body.hyphenation = false;
    s
}

#[test]
fn grid_one_column_when_target_exceeds_half() {
    // stream whose first draw lands the target on 80 mm
    let rules = default_rules();
    let page = PageSize { w: 130.0, h: 200.0 };
    let margins = Margins { top: 12.0, inside: 12.0, bottom: 13.7, outside: 22.0 };
    for seed in 0..50 {
        let g = compute_grid(page, margins, &rules, &mut SeededStream::new(seed)).unwrap();
        assert_eq!(g.columns, 1);
        assert_eq!(g.column_width, 96.0);
        assert_eq!(g.gutter, None);
    }
}

#[test]
fn grid_with_examples() {
    let g = grid_with(200.0, 2, 5.0);
    assert_eq!((g.columns, g.column_width, g.gutter), (2, 97.5, Some(5.0)));
    assert_eq!(((200.0f64 / 70.0).floor()) as u32, 2);
    let g = grid_with(96.0, 1, 5.0);
    assert_eq!((g.columns, g.column_width, g.gutter), (1, 96.0, None));
}

#[test]
fn narrow_block_is_one_column() {
    let rules = default_rules();
    let page = PageSize { w: 110.0, h: 170.0 };
    let margins = Margins { top: 10.0, inside: 25.0, bottom: 10.0, outside: 25.0 };
    let g = compute_grid(page, margins, &rules, &mut SeededStream::new(3)).unwrap();
    assert_eq!((g.columns, g.column_width), (1, 60.0));
}

#[test]
fn drawn_grid_matches_floor_rule() {
    let rules = default_rules();
    let page = PageSize { w: 230.0, h: 120.0 };
    let margins = Margins { top: 10.0, inside: 15.0, bottom: 10.0, outside: 15.0 };
    for seed in 0..200 {
        let mut probe = SeededStream::new(seed);
        let target = probe.uniform(70.0, 140.0);
        let gutter = round1(probe.uniform(4.0, 6.0));
        let g = compute_grid(page, margins, &rules, &mut SeededStream::new(seed)).unwrap();
        let cols = ((200.0 / target).floor() as u32).max(1);
        assert_eq!(g.columns, cols);
        let expect = (200.0 - f64::from(cols - 1) * gutter) / f64::from(cols);
        assert!((g.column_width - expect).abs() < 1e-9);
    }
}

#[test]
fn non_positive_block_is_an_error() {
    let rules = default_rules();
    let page = PageSize { w: 40.0, h: 200.0 };
    let margins = Margins { top: 10.0, inside: 20.0, bottom: 10.0, outside: 20.0 };
    assert!(matches!(
        compute_grid(page, margins, &rules, &mut SeededStream::new(0)),
        Err(Error::NonPositiveBlock(_))
    ));
}

#[test]
fn fit_keeps_a_good_measure() {
    let rules = default_rules();
    let m = FontMetrics::uniform("u", 0.5);
    let s = with_column(planned(1), PageSize { w: 130.0, h: 200.0 }, 12.0, 272.0, 10.0);
    assert!((estimate_chars_per_line(272.0, 0.5, 10.0) - 54.4).abs() < 1e-12);
    let fitted = fit_body_size(&s, &m, &rules).unwrap();
    assert_eq!(fitted.body.size, 10.0);
    assert_eq!(fitted.grid.columns, 1);
    assert_eq!(fitted.margins, s.margins);
}

#[test]
fn fit_modifies_the_grid_when_size_clamps_low() {
    let rules = default_rules();
    let m = FontMetrics::uniform("u", 0.5);
    let s = with_column(planned(1), PageSize { w: 105.0, h: 180.0 }, 26.0, 150.0, 12.0);
    assert_eq!(estimate_chars_per_line(150.0, 0.5, 12.0), 25.0);
    assert_eq!(estimate_chars_per_line(150.0, 0.5, 8.0), 37.5);
    let fitted = fit_body_size(&s, &m, &rules).unwrap();
    assert!(fitted.margins.inside < s.margins.inside || fitted.margins.outside < s.margins.outside);
    let e = estimate_chars_per_line(fitted.column_width_pt(), 0.5, fitted.body.size);
    assert!((45.0..=75.0).contains(&e), "{e}");
    assert!(violations(&fitted, &rules).is_empty());
}

#[test]
fn fit_splits_a_wide_measure() {
    let rules = default_rules();
    let m = FontMetrics::uniform("u", 0.5);
    let s = with_column(planned(1), PageSize { w: 230.0, h: 120.0 }, 7.0, 600.0, 8.0);
    assert_eq!(estimate_chars_per_line(600.0, 0.5, 8.0), 150.0);
    assert_eq!(estimate_chars_per_line(600.0, 0.5, 12.0), 100.0);
    let fitted = fit_body_size(&s, &m, &rules).unwrap();
    assert!(fitted.grid.columns >= 2);
    let e = estimate_chars_per_line(fitted.column_width_pt(), 0.5, fitted.body.size);
    assert!((45.0..=75.0).contains(&e), "{e}");
}

#[test]
fn fit_is_idempotent() {
    let rules = default_rules();
    for em in [0.42, 0.5, 0.55] {
        let m = FontMetrics::uniform("u", em);
        for seed in 0..100 {
            let once = fit_body_size(&planned(seed), &m, &rules).unwrap();
            let twice = fit_body_size(&once, &m, &rules).unwrap();
            assert_eq!(once, twice, "seed {seed}");
        }
    }
}

#[test]
fn fit_leading_follows_the_pairing() {
    let rules = default_rules();
    let m = FontMetrics::uniform("u", 0.5);
    let s = fit_body_size(&planned(4), &m, &rules).unwrap();
    let ratio = rules.pairing(&s.pairing).unwrap().leading.clamp(1.15, 1.40);
    assert!((s.body.leading - s.body.size * ratio).abs() < 0.006);
}

#[test]
fn planned_margins_are_in_range() {
    let s = planned(42);
    assert!((7.0..=15.0).contains(&s.margins.top));
    assert!((7.0..=15.0).contains(&s.margins.bottom));
    assert!((7.0..=30.0).contains(&s.margins.inside));
    assert!((7.0..=30.0).contains(&s.margins.outside));
}

#[test]
fn plan_is_deterministic() {
    for seed in [0, 1, 42, u64::MAX] {
        assert_eq!(planned(seed), planned(seed));
    }
}

#[test]
fn plan_fuzz_respects_rules() {
    let rules = default_rules();
    for seed in 0..1000 {
        let s = planned(seed);
        let v = violations(&s, &rules);
        assert!(v.is_empty(), "seed {seed}: {v:?}");
    }
}

#[test]
fn long_reading_always_gets_a_serif_body() {
    let rules = default_rules();
    for seed in 0..500 {
        let s = planned(seed);
        assert_eq!(rules.pairing(&s.pairing).unwrap().body_class, Classification::Serif);
    }
}

#[test]
fn table3_pins_pass_through() {
    let rules = default_rules();
    let c = import_settings(TABLE3, &rules).unwrap();
    assert_eq!(c.pairing.as_deref(), Some("la-nord+antwerp"));
    let t1 = &c.titles.as_ref().unwrap()[0];
    assert_eq!((t1.size, t1.leading), (24.0, 27.0));
    for seed in [0, 9, 77] {
        let s = plan(&long_stats(), &rules, &c, seed).unwrap();
        assert_eq!(s.page, PageSize { w: 130.0, h: 200.0 });
        assert_eq!(s.margins, Margins { top: 12.0, inside: 12.0, bottom: 13.7, outside: 22.0 });
        assert_eq!(s.grid.columns, 1);
        assert_eq!((s.body.size, s.body.leading), (10.0, 13.0));
        assert_eq!(s.body.alignment, Alignment::Justified);
        assert!(s.body.hyphenation);
        assert_eq!(s.cover_color, Cmyk([2.0, 14.0, 38.0, 0.0]));
        assert_eq!(s.pairing, "la-nord+antwerp");
    }
}

#[test]
fn export_contains_table3_values() {
    let rules = default_rules();
    let s = plan(&long_stats(), &rules, &import_settings(TABLE3, &rules).unwrap(), 1).unwrap();
    let v: serde_json::Value = serde_json::from_str(&export_settings(&s)).unwrap();
    assert_eq!(v["page"]["w"], 130.0);
    assert_eq!(v["page"]["h"], 200.0);
    assert_eq!(v["margins"]["top"], 12.0);
    assert_eq!(v["margins"]["inside"], 12.0);
    assert_eq!(v["margins"]["bottom"], 13.7);
    assert_eq!(v["margins"]["outside"], 22.0);
    assert_eq!(v["grid"]["columns"], 1);
    assert_eq!(v["body"]["size"], 10.0);
    assert_eq!(v["body"]["leading"], 13.0);
    assert_eq!(v["body"]["alignment"], "justified");
    assert_eq!(v["body"]["hyphenation"], true);
}

#[test]
fn export_import_round_trip_is_a_fixpoint() {
    let rules = default_rules();
    for seed in 0..50 {
        let s = planned(seed);
        let text = export_settings(&s);
        let again = plan(&long_stats(), &rules, &import_settings(&text, &rules).unwrap(), seed + 1000).unwrap();
        let mut expect = s.clone();
        expect.seed = seed + 1000;
        let mut got = again.clone();
        got.seed = seed + 1000;
        assert_eq!(export_settings(&got), export_settings(&expect), "seed {seed}");
    }
}

#[test]
fn seeds_differ_only_in_seed_field() {
    let s = planned(5);
    let mut t = s.clone();
    t.seed = 6;
    let a: serde_json::Value = serde_json::from_str(&export_settings(&s)).unwrap();
    let b: serde_json::Value = serde_json::from_str(&export_settings(&t)).unwrap();
    let (a, b) = (a.as_object().unwrap(), b.as_object().unwrap());
    let differing: Vec<_> = a.keys().filter(|k| a[*k] != b[*k]).collect();
    assert_eq!(differing, vec!["seed"]);
}

#[test]
fn import_rejects_out_of_range_margin() {
    let rules = default_rules();
    let err = import_settings(r#"{"margins": {"top": 20}}"#, &rules).unwrap_err();
    assert!(matches!(&err, Error::Constraint { field, .. } if field == "margins.top"), "{err}");
    assert!(err.to_string().contains("margins.top"));
}

#[test]
fn import_rejects_empty_files() {
    let rules = default_rules();
    for text in ["", "  \n", "{}"] {
        let err = import_settings(text, &rules).unwrap_err();
        assert!(matches!(err, Error::NoFields), "{text:?}");
        assert!(err.to_string().contains("no fields"));
    }
}

#[test]
fn import_rejects_unknown_keys() {
    let rules = default_rules();
    assert!(import_settings(r#"{"pageSize": 3}"#, &rules).is_err());
}

#[test]
fn imported_settings_reproduce_structure_for_other_content() {
    let rules = default_rules();
    let s = planned(11);
    let c = import_settings(&export_settings(&s), &rules).unwrap();
    let short = ContentStats {
        words: 900,
        images: 0,
        words_per_image: f64::INFINITY,
        book_type: BookType::ShortReading,
        language: "pt".into(),
    };
    for seed in 0..20 {
        let t = plan(&short, &rules, &c, seed).unwrap();
        assert_eq!(t.page, s.page);
        assert_eq!(t.margins, s.margins);
        assert_eq!(t.grid, s.grid);
        assert_eq!(t.pairing, s.pairing);
        assert_eq!(t.body, s.body);
        assert_eq!(t.titles, s.titles);
        assert_eq!(t.header_layout, s.header_layout);
        assert_eq!(t.features, s.features);
        assert_eq!(t.cover_color, s.cover_color);
    }
}

#[test]
fn settings_file_rebuilds_the_design() {
    for seed in 0..20 {
        let s = planned(seed);
        let c = parse_constraints(&export_settings(&s)).unwrap();
        assert_eq!(DesignSettings::from_constraints(&c).unwrap(), s);
    }
    let mut c = planned(3).to_constraints();
    c.margins.inside = None;
    match DesignSettings::from_constraints(&c) {
        Err(Error::Constraint { field, .. }) => assert_eq!(field, "margins.inside"),
        other => panic!("{other:?}"),
    }
}
