mod common;

use std::sync::OnceLock;

use common::{fixture, read_fixture};
use folio_core::features::{Feature, GradientMargins};
use folio_core::geom::Cmyk;
use folio_core::planner::{import_settings, CaptionPlacement};
use folio_core::typeset::layout::{Fill, FrameKind, Layer, LayoutDocument, Page, PageKind, TextRole};
use folio_core::{Book, Constraints, Engine};

fn engine() -> &'static Engine {
    static E: OnceLock<Engine> = OnceLock::new();
    E.get_or_init(Engine::with_defaults)
}

fn table3() -> Constraints {
    let mut c = import_settings(&read_fixture("table3.json"), &engine().rules).unwrap();
    c.toc = Some(true);
    c.colophon = Some(true);
    c
}

fn novel() -> &'static Book {
    static B: OnceLock<Book> = OnceLock::new();
    B.get_or_init(|| engine().generate(&read_fixture("moby-dick.md"), None, &table3(), 42).unwrap())
}

fn atlas(c: &Constraints, seed: u64) -> Book {
    engine()
        .generate(&read_fixture("atlas.md"), Some(&fixture("images")), c, seed)
        .unwrap()
}

fn roles(page: &Page) -> Vec<&TextRole> {
    page.frames.iter().filter_map(|f| f.text()).map(|t| &t.role).collect()
}

/// Text of every line of the frames with `role`, rejoined across breaks.
fn text_of(page: &Page, role: &TextRole) -> String {
    let mut out = String::new();
    for t in page.frames.iter().filter_map(|f| f.text()).filter(|t| &t.role == role) {
        for l in &t.lines {
            let text = l.text();
            if l.hyphenated {
                out.push_str(text.trim_end_matches('-'));
            } else {
                out.push_str(&text);
                out.push(' ');
            }
        }
    }
    out
}

fn pages_of(doc: &LayoutDocument, kind: PageKind) -> Vec<&Page> {
    doc.pages.iter().filter(|p| p.kind == kind).collect()
}

#[test]
fn table3_text_block_on_every_body_page() {
    let doc = &novel().layout;
    assert!(doc.body_pages().count() > 100);
    for p in doc.body_pages() {
        assert_eq!((p.width, p.height), (130.0, 200.0));
        assert!((p.block.w - 96.0).abs() < 1e-9, "{}", p.block.w);
        assert!((p.block.h - 174.3).abs() < 1e-9, "{}", p.block.h);
        assert_eq!(p.block.y, 12.0);
        let inside = if p.recto { p.block.x } else { 130.0 - p.block.right() };
        assert!((inside - 12.0).abs() < 1e-9);
    }
}

#[test]
fn every_level_one_heading_gets_a_title_page() {
    let book = novel();
    let level1: Vec<&str> = book.manuscript.headings().filter(|h| h.level == 1).map(|h| h.text.as_str()).collect();
    assert_eq!(level1.len(), 13);
    let titles = pages_of(&book.layout, PageKind::Title);
    assert_eq!(titles.len(), level1.len());
    for (p, text) in titles.iter().zip(&level1) {
        assert!(roles(p).iter().all(|r| **r == TextRole::Title { level: 1 }), "{:?}", roles(p));
        assert_eq!(text_of(p, &TextRole::Title { level: 1 }).trim(), *text);
        assert_eq!(p.body_words(), 0);
    }
}

#[test]
fn three_parts_give_three_title_pages() {
    let book = engine().generate(&read_fixture("rios.md"), None, &Constraints::default(), 5).unwrap();
    assert_eq!(pages_of(&book.layout, PageKind::Title).len(), 3);
}

#[test]
fn contents_list_level_one_and_two_headings() {
    let book = novel();
    let headings: Vec<_> = book.manuscript.headings().filter(|h| h.level <= 2).collect();
    let entries: Vec<(u8, u32)> = pages_of(&book.layout, PageKind::Toc)
        .iter()
        .flat_map(|p| roles(p))
        .filter_map(|r| match r {
            TextRole::TocEntry { level, page } => Some((*level, *page)),
            _ => None,
        })
        .collect();
    assert_eq!(entries.len(), headings.len());
    assert_eq!(entries.iter().filter(|e| e.0 == 1).count(), 13);
    for (e, h) in entries.iter().zip(&headings) {
        assert_eq!(e.0, h.level);
    }
    assert!(entries.windows(2).all(|w| w[0].1 <= w[1].1));
    // each level-1 entry points at its title page
    let title_numbers: Vec<u32> = pages_of(&book.layout, PageKind::Title).iter().map(|p| p.number.unwrap()).collect();
    let level1: Vec<u32> = entries.iter().filter(|e| e.0 == 1).map(|e| e.1).collect();
    assert_eq!(level1, title_numbers);
}

#[test]
fn contents_follow_the_cover() {
    let kinds: Vec<PageKind> = novel().layout.pages.iter().map(|p| p.kind).collect();
    assert_eq!(kinds[0], PageKind::Cover);
    assert_eq!(kinds[1], PageKind::Toc);
    let first_body = kinds.iter().position(|k| matches!(k, PageKind::Title | PageKind::Body)).unwrap();
    assert!(kinds[1..first_body].iter().all(|k| *k == PageKind::Toc));
    assert!(novel().layout.pages[..first_body].iter().all(|p| p.number.is_none()));
}

#[test]
fn no_contents_when_switched_off() {
    let mut c = table3();
    c.toc = Some(false);
    let book = engine().generate(&read_fixture("rios.md"), None, &c, 1).unwrap();
    assert!(pages_of(&book.layout, PageKind::Toc).is_empty());
}

#[test]
fn colophon_closes_the_book() {
    let doc = &novel().layout;
    let last = doc.pages.last().unwrap();
    assert_eq!(last.kind, PageKind::Colophon);
    let text: String = pages_of(doc, PageKind::Colophon)
        .iter()
        .map(|p| text_of(p, &TextRole::Colophon))
        .collect();
    assert!(text.contains("130 × 200 mm"), "{text}");
    assert!(text.contains("1 column"), "{text}");
    assert!(text.contains("top 12 mm, inside 12 mm, bottom 13.7 mm, outside 22 mm"), "{text}");
    assert!(text.contains("Seed 42."), "{text}");
    let colophon = pages_of(doc, PageKind::Colophon);
    for p in &colophon {
        for t in p.frames.iter().filter_map(|f| f.text()) {
            assert_eq!((t.size, t.leading), (10.0, 13.0));
        }
    }
}

#[test]
fn no_colophon_when_switched_off() {
    let mut c = table3();
    c.colophon = Some(false);
    let book = engine().generate(&read_fixture("rios.md"), None, &c, 1).unwrap();
    assert!(pages_of(&book.layout, PageKind::Colophon).is_empty());
    assert_ne!(book.layout.pages.last().unwrap().kind, PageKind::Colophon);
}

#[test]
fn running_header_names_the_last_title() {
    let mut src = String::from("title: Notas\nlanguage: pt\n\n# Singularidades\n\n");
    let para = read_fixture("rios.md").lines().nth(6).unwrap().to_string();
    for _ in 0..12 {
        src.push_str(&para);
        src.push_str("\n\n");
    }
    let book = engine().generate(&src, None, &Constraints::default(), 2).unwrap();
    let body = pages_of(&book.layout, PageKind::Body);
    assert!(body.len() >= 2);
    let headers: Vec<&str> = body
        .iter()
        .flat_map(|p| p.frames.iter())
        .filter_map(|f| match &f.kind {
            FrameKind::Header(h) => Some(h.text.as_str()),
            _ => None,
        })
        .collect();
    assert!(!headers.is_empty());
    assert!(headers.iter().all(|h| *h == "Singularidades"), "{headers:?}");
}

#[test]
fn frames_stay_inside_the_block_and_apart() {
    let mut books = vec![novel().clone()];
    for seed in 0..6 {
        books.push(atlas(&Constraints::default(), seed));
        books.push(engine().generate(&read_fixture("cidades.md"), None, &Constraints::default(), seed).unwrap());
    }
    for book in &books {
        for p in book.layout.pages.iter().filter(|p| p.kind != PageKind::Cover) {
            let content: Vec<_> = p.frames_on(Layer::Content).collect();
            for f in &content {
                assert!(p.block.contains(&f.rect, 1e-6), "{:?} outside {:?}", f.rect, p.block);
            }
            for (i, a) in content.iter().enumerate() {
                for b in &content[i + 1..] {
                    assert!(!a.rect.overlaps(&b.rect, 1e-6), "{:?} overlaps {:?}", a.rect, b.rect);
                }
            }
            for f in p.frames_on(Layer::Background) {
                assert!(matches!(f.kind, FrameKind::Decor(_)));
            }
        }
        let numbers: Vec<u32> = book.layout.pages.iter().filter_map(|p| p.number).collect();
        assert_eq!(numbers.first(), Some(&1));
        assert!(numbers.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn cover_uses_the_table3_colour_and_uppercase_title() {
    let doc = &novel().layout;
    let cover = &doc.pages[0];
    assert_eq!(cover.kind, PageKind::Cover);
    let fill = cover
        .frames_on(Layer::Background)
        .find_map(|f| match &f.kind {
            FrameKind::Decor(d) => Some(d.fill.clone()),
            _ => None,
        })
        .unwrap();
    assert_eq!(fill, Fill::Solid { color: Cmyk([2.0, 14.0, 38.0, 0.0]) });
    let title = text_of(cover, &TextRole::CoverTitle);
    assert_eq!(title.split_whitespace().collect::<Vec<_>>().join(" "), "MOBY DICK; OR, THE WHALE");
    assert_eq!(text_of(cover, &TextRole::CoverAuthor).trim(), "HERMAN MELVILLE");
    let back = doc.back_cover.as_ref().unwrap();
    assert_eq!(back.kind, PageKind::BackCover);
    assert!(text_of(back, &TextRole::Attribution).contains("42"));
}

#[test]
fn missing_author_leaves_the_title_alone() {
    let with = read_fixture("rios.md");
    let without: String = with.lines().filter(|l| !l.starts_with("author:")).map(|l| format!("{l}\n")).collect();
    let a = engine().generate(&with, None, &Constraints::default(), 9).unwrap();
    let b = engine().generate(&without, None, &Constraints::default(), 9).unwrap();
    let (ca, cb) = (&a.layout.pages[0], &b.layout.pages[0]);
    assert!(roles(ca).contains(&&TextRole::CoverAuthor));
    assert!(!roles(cb).contains(&&TextRole::CoverAuthor));
    let title = |p: &Page| p.frames.iter().find(|f| f.text().is_some_and(|t| t.role == TextRole::CoverTitle)).cloned();
    assert_eq!(title(ca), title(cb));
}

#[test]
fn svg_pages_match_the_document() {
    let book = novel();
    let svgs = book.svg_pages();
    assert_eq!(svgs.len(), book.page_count());
    for svg in &svgs {
        assert!(svg.contains("width=\"130mm\" height=\"200mm\""));
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn images_and_rotated_captions() {
    let mut c = Constraints::default();
    c.margins.outside = Some(24.0);
    c.caption.placement = Some(CaptionPlacement::AsideRotated);
    let book = atlas(&c, 4);
    assert_eq!(book.settings.caption.placement, CaptionPlacement::AsideRotated);
    let frames: Vec<_> = book.layout.pages.iter().flat_map(|p| p.frames.iter()).collect();
    let images: Vec<_> = frames
        .iter()
        .filter_map(|f| match &f.kind {
            FrameKind::Image(i) => Some(i.name.as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(images, ["harbour-at-dawn", "tall_lighthouse", "salt-pans"]);
    assert!(frames.iter().any(|f| matches!(&f.kind, FrameKind::Caption(c) if c.rotated)));
    let svgs = book.svg_pages().concat();
    assert!(svgs.contains("rotate(90)"));
    assert!(svgs.contains("images/tall_lighthouse.png"));

    let mut c = Constraints::default();
    c.caption.placement = Some(CaptionPlacement::BelowLeft);
    let book = atlas(&c, 4);
    let captions: Vec<String> = book
        .layout
        .pages
        .iter()
        .flat_map(|p| p.frames.iter())
        .filter_map(|f| match &f.kind {
            FrameKind::Caption(c) => {
                assert!(!c.rotated);
                Some(c.lines.iter().map(|l| l.text()).collect::<Vec<_>>().join(" "))
            }
            _ => None,
        })
        .collect();
    assert_eq!(captions.len(), 3);
    assert!(!book.svg_pages().concat().contains("rotate(90)"));
}

fn with_features(features: Vec<Feature>, gradient: Option<GradientMargins>) -> Book {
    let mut c = Constraints::default();
    c.features = Some(features);
    c.gradient_margins = gradient;
    engine().generate(&read_fixture("rios.md"), None, &c, 11).unwrap()
}

fn decor_per_page(book: &Book) -> Vec<usize> {
    book.layout
        .pages
        .iter()
        .filter(|p| p.kind != PageKind::Cover)
        .map(|p| p.frames_on(Layer::Background).count())
        .collect()
}

#[test]
fn half_page_background_paints_each_page_once() {
    let book = with_features(vec![Feature::HalfPageBackground], None);
    let counts = decor_per_page(&book);
    assert!(counts.len() >= 5, "{counts:?}");
    assert!(counts.iter().all(|n| *n == 1), "{counts:?}");
    for p in book.layout.pages.iter().filter(|p| p.kind != PageKind::Cover) {
        let f = p.frames_on(Layer::Background).next().unwrap();
        assert!((f.rect.w - p.width / 2.0).abs() < 1e-9);
        assert_eq!(f.rect.h, p.height);
        // the outer half
        let outer_x = if p.recto { p.width / 2.0 } else { 0.0 };
        assert_eq!(f.rect.x, outer_x);
    }
}

#[test]
fn gradient_in_both_margins() {
    let book = with_features(vec![Feature::MarginGradient], Some(GradientMargins::Both));
    assert!(decor_per_page(&book).iter().all(|n| *n == 2));
    let plain = with_features(vec![], None);
    assert!(decor_per_page(&plain).iter().all(|n| *n == 0));
}

#[test]
fn generation_is_byte_identical() {
    let c = table3();
    let a = engine().generate(&read_fixture("rios.md"), None, &c, 77).unwrap();
    let b = engine().generate(&read_fixture("rios.md"), None, &c, 77).unwrap();
    assert_eq!(a.layout_json(), b.layout_json());
    assert_eq!(a.svg_pages(), b.svg_pages());
    assert_eq!(a.settings_json(), b.settings_json());
}

#[test]
fn output_directory_layout() {
    let book = atlas(&Constraints::default(), 3);
    let dir = tempfile::tempdir().unwrap();
    book.write_to(dir.path(), engine().fonts.map()).unwrap();
    for f in ["settings.json", "layout.json", "fonts.json", "pages/page-0001.svg", "pages/back-cover.svg", "images/salt-pans.png"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let n = book.page_count();
    assert!(dir.path().join(format!("pages/page-{n:04}.svg")).is_file());
    assert!(!dir.path().join(format!("pages/page-{:04}.svg", n + 1)).exists());
}
