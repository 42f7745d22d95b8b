use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use folio_core::Engine;
use folio_server::{router, Config};
use serde_json::Value;
use tower::ServiceExt;

const BOUNDARY: &str = "folio-test-boundary";

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).unwrap()
}

fn engine() -> Arc<Engine> {
    static E: OnceLock<Arc<Engine>> = OnceLock::new();
    Arc::clone(E.get_or_init(|| Arc::new(Engine::with_defaults())))
}

fn app(spill: &tempfile::TempDir, resident: usize) -> Router {
    let mut config = Config::new(spill.path());
    config.resident_books = resident;
    router(engine(), &config)
}

enum Part<'a> {
    Text(&'a str, &'a str),
    File(&'a str, &'a str, Vec<u8>),
}

fn multipart(parts: &[Part]) -> Request<Body> {
    let mut body = Vec::new();
    for p in parts {
        body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
        match p {
            Part::Text(name, text) => {
                body.extend_from_slice(format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n").as_bytes());
                body.extend_from_slice(text.as_bytes());
            }
            Part::File(name, file, data) => {
                body.extend_from_slice(
                    format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{file}\"\r\nContent-Type: application/octet-stream\r\n\r\n")
                        .as_bytes(),
                );
                body.extend_from_slice(data);
            }
        }
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    Request::post("/api/books")
        .header(header::CONTENT_TYPE, format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(body))
        .unwrap()
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, String, String) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let ctype = res
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, ctype, String::from_utf8_lossy(&bytes).into_owned())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, String, String) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post_json(app: &Router, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, _, text) = send(app, req).await;
    (status, serde_json::from_str(&text).unwrap())
}

async fn create(app: &Router, parts: &[Part<'_>]) -> (StatusCode, Value) {
    let (status, _, text) = send(app, multipart(parts)).await;
    (status, serde_json::from_str(&text).unwrap())
}

fn structure(settings: &Value) -> Vec<Value> {
    ["page", "margins", "grid", "pairing", "headerLayout", "features", "coverColor"]
        .iter()
        .map(|k| settings[k].clone())
        .chain([settings["body"]["alignment"].clone(), settings["body"]["size"].clone()])
        .collect()
}

#[tokio::test]
async fn create_and_read_back_a_book() {
    let spill = tempfile::tempdir().unwrap();
    let app = app(&spill, 4);
    let (status, book) = create(&app, &[Part::Text("manuscript", &fixture("rios.md")), Part::Text("constraints", r#"{"seed": 5}"#)]).await;
    assert_eq!(status, StatusCode::CREATED, "{book}");
    let id = book["bookId"].as_str().unwrap();
    let pages = book["pageCount"].as_u64().unwrap();
    assert!(pages > 3);
    assert_eq!(book["seed"], 5);
    assert_eq!(book["revision"], 1);
    assert_eq!(book["settings"]["language"], "pt");

    let (status, ctype, svg) = get(&app, &format!("/api/books/{id}/pages/1.svg")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype, "image/svg+xml");
    let w = book["settings"]["page"]["w"].as_f64().unwrap();
    let h = book["settings"]["page"]["h"].as_f64().unwrap();
    assert!(svg.contains(&format!("width=\"{w}mm\" height=\"{h}mm\"")), "{}", &svg[..200]);

    let (status, _, _) = get(&app, &format!("/api/books/{id}/pages/{pages}.svg")).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _, _) = get(&app, &format!("/api/books/{id}/pages/back-cover.svg")).await;
    assert_eq!(status, StatusCode::OK);
    for bad in [0, pages + 1] {
        let (status, _, _) = get(&app, &format!("/api/books/{id}/pages/{bad}.svg")).await;
        assert_eq!(status, StatusCode::NOT_FOUND);
    }

    let (status, ctype, settings) = get(&app, &format!("/api/books/{id}/settings")).await;
    assert_eq!((status, ctype.as_str()), (StatusCode::OK, "application/json"));
    let settings: Value = serde_json::from_str(&settings).unwrap();
    assert_eq!(settings, book["settings"]);
    let (status, _, layout) = get(&app, &format!("/api/books/{id}/layout")).await;
    assert_eq!(status, StatusCode::OK);
    let layout: Value = serde_json::from_str(&layout).unwrap();
    assert_eq!(layout["pages"].as_array().unwrap().len() as u64, pages);
}

#[tokio::test]
async fn unknown_books_are_not_found() {
    let spill = tempfile::tempdir().unwrap();
    let app = app(&spill, 4);
    for uri in ["/api/books/nope/settings", "/api/books/nope/layout", "/api/books/nope/pages/1.svg"] {
        let (status, _, _) = get(&app, uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
    }
    let (status, _) = post_json(&app, "/api/books/nope/regenerate", r#"{"keepSettings": true}"#).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn rule_violations_name_their_field() {
    let spill = tempfile::tempdir().unwrap();
    let app = app(&spill, 4);
    let (status, body) = post_json(&app, "/api/settings/validate", r#"{"margins": {"top": 20}}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["fields"][0]["field"], "margins.top");

    let (status, body) = post_json(&app, "/api/settings/validate", &fixture("table3.json")).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["valid"], true);

    let (status, body) = post_json(&app, "/api/settings/validate", "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("no fields"));

    let (status, body) = post_json(&app, "/api/settings/validate", r#"{"colour": 1}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("colour"), "{body}");

    let (status, body) = create(
        &app,
        &[Part::Text("manuscript", &fixture("rios.md")), Part::Text("constraints", r#"{"margins": {"top": 20}}"#)],
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["fields"][0]["field"], "margins.top");

    let (status, body) = create(&app, &[Part::Text("constraints", "{}")]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["fields"][0]["field"], "manuscript");
}

#[tokio::test]
async fn infeasible_designs_are_unprocessable() {
    let spill = tempfile::tempdir().unwrap();
    let app = app(&spill, 4);
    let pinned = r#"{
        "page": {"w": 105, "h": 180},
        "margins": {"inside": 30, "outside": 30},
        "grid": {"columns": 1},
        "body": {"size": 12, "alignment": "justified", "hyphenation": true}
    }"#;
    let (status, body) =
        create(&app, &[Part::Text("manuscript", &fixture("rios.md")), Part::Text("constraints", pinned)]).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    assert!(body["error"].as_str().unwrap().contains("infeasible"));
}

#[tokio::test]
async fn regenerate_keeps_or_redraws_the_design() {
    let spill = tempfile::tempdir().unwrap();
    let app = app(&spill, 4);
    let (_, book) = create(&app, &[Part::Text("manuscript", &fixture("cidades.md"))]).await;
    let id = book["bookId"].as_str().unwrap();

    let (status, kept) = post_json(&app, &format!("/api/books/{id}/regenerate"), r#"{"keepSettings": true}"#).await;
    assert_eq!(status, StatusCode::OK, "{kept}");
    assert_eq!(kept["revision"], 2);
    assert_ne!(kept["seed"], book["seed"]);
    assert_eq!(structure(&kept["settings"]), structure(&book["settings"]));

    let mut redrawn = Vec::new();
    for _ in 0..4 {
        let (status, r) = post_json(&app, &format!("/api/books/{id}/regenerate"), "").await;
        assert_eq!(status, StatusCode::OK, "{r}");
        redrawn.push(structure(&r["settings"]));
    }
    assert!(redrawn.iter().any(|s| *s != structure(&book["settings"])));
    let (_, _, settings) = get(&app, &format!("/api/books/{id}/settings")).await;
    let settings: Value = serde_json::from_str(&settings).unwrap();
    assert_eq!(structure(&settings), *redrawn.last().unwrap());

    let (status, _) = post_json(&app, &format!("/api/books/{id}/regenerate"), r#"{"keep": 1}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn uploaded_images_are_placed_and_served() {
    let spill = tempfile::tempdir().unwrap();
    let app = app(&spill, 4);
    let mut parts = vec![Part::Text("manuscript", &*Box::leak(fixture("atlas.md").into_boxed_str()))];
    for name in ["harbour-at-dawn.png", "tall_lighthouse.png", "salt-pans.png"] {
        parts.push(Part::File("images", name, std::fs::read(fixtures().join("images").join(name)).unwrap()));
    }
    let (status, book) = create(&app, &parts).await;
    assert_eq!(status, StatusCode::CREATED, "{book}");
    assert_eq!(book["bookType"], "text_and_images");
    let id = book["bookId"].as_str().unwrap();
    let pages = book["pageCount"].as_u64().unwrap();
    let mut found = false;
    for n in 1..=pages {
        let (_, _, svg) = get(&app, &format!("/api/books/{id}/pages/{n}.svg")).await;
        found |= svg.contains("images/salt-pans.png");
    }
    assert!(found);
    let (status, ctype, _) = get(&app, &format!("/api/books/{id}/pages/images/salt-pans.png")).await;
    assert_eq!((status, ctype.as_str()), (StatusCode::OK, "image/png"));
    let (status, _, _) = get(&app, &format!("/api/books/{id}/pages/images/..%2Fsettings.json")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // a manuscript naming an image that was not uploaded
    let (status, body) = create(&app, &[Part::Text("manuscript", "title: T\n\nText.\n\n@missing@\n")]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
}

#[tokio::test]
async fn spilled_books_are_read_from_disk() {
    let spill = tempfile::tempdir().unwrap();
    let app = app(&spill, 1);
    let (_, first) = create(&app, &[Part::Text("manuscript", &fixture("rios.md")), Part::Text("constraints", r#"{"seed": 1}"#)]).await;
    let id = first["bookId"].as_str().unwrap();
    let (_, _, layout_before) = get(&app, &format!("/api/books/{id}/layout")).await;
    let (_, _, page_before) = get(&app, &format!("/api/books/{id}/pages/2.svg")).await;
    // the second book pushes the first out of memory
    create(&app, &[Part::Text("manuscript", &fixture("cidades.md"))]).await;
    let (status, _, layout_after) = get(&app, &format!("/api/books/{id}/layout")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(layout_after, layout_before);
    let (_, _, page_after) = get(&app, &format!("/api/books/{id}/pages/2.svg")).await;
    assert_eq!(page_after, page_before);
    let (status, kept) = post_json(&app, &format!("/api/books/{id}/regenerate"), r#"{"keepSettings": true}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(structure(&kept["settings"]), structure(&first["settings"]));
    assert!(spill.path().join(id).is_dir());
}

#[tokio::test]
async fn concurrent_books_stay_apart() {
    let spill = tempfile::tempdir().unwrap();
    let app = app(&spill, 8);
    let texts = [fixture("rios.md"), fixture("cidades.md"), fixture("atlas.md").replace("@", ""), fixture("rios.md")];
    let jobs = texts.iter().enumerate().map(|(i, t)| {
        let app = app.clone();
        let t = t.clone();
        tokio::spawn(async move {
            let seed = format!("{{\"seed\": {i}}}");
            create(&app, &[Part::Text("manuscript", &t), Part::Text("constraints", &seed)]).await
        })
    });
    let mut ids = std::collections::BTreeSet::new();
    let mut results = Vec::new();
    for j in jobs {
        let (status, book) = j.await.unwrap();
        assert_eq!(status, StatusCode::CREATED);
        ids.insert(book["bookId"].as_str().unwrap().to_string());
        results.push(book);
    }
    assert_eq!(ids.len(), 4);
    for (i, book) in results.iter().enumerate() {
        assert_eq!(book["seed"], i as u64);
        let lang = if i == 2 { "en" } else { "pt" };
        assert_eq!(book["settings"]["language"], lang);
    }
    // equal inputs, separate jobs, equal output
    let (_, _, a) = get(&app, &format!("/api/books/{}/layout", results[0]["bookId"].as_str().unwrap())).await;
    let app2 = self::app(&spill, 8);
    let (_, again) = create(&app2, &[Part::Text("manuscript", &texts[0]), Part::Text("constraints", r#"{"seed": 0}"#)]).await;
    let (_, _, b) = get(&app2, &format!("/api/books/{}/layout", again["bookId"].as_str().unwrap())).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn rules_and_fonts() {
    let spill = tempfile::tempdir().unwrap();
    let app = app(&spill, 4);
    let (status, _, rules) = get(&app, "/api/rules").await;
    assert_eq!(status, StatusCode::OK);
    let rules: Value = serde_json::from_str(&rules).unwrap();
    assert_eq!(rules["margins"]["topBottom"], serde_json::json!({"min": 7.0, "max": 15.0}));
    let (status, _, fonts) = get(&app, "/api/fonts").await;
    assert_eq!(status, StatusCode::OK);
    let fonts: Value = serde_json::from_str(&fonts).unwrap();
    let ids: Vec<&str> = fonts["pairings"].as_array().unwrap().iter().map(|p| p["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"la-nord+antwerp"));
}

#[tokio::test]
async fn static_files_at_the_root() {
    let spill = tempfile::tempdir().unwrap();
    let site = tempfile::tempdir().unwrap();
    std::fs::write(site.path().join("index.html"), "<h1>studio</h1>").unwrap();
    let mut config = Config::new(spill.path());
    config.static_dir = Some(site.path().to_path_buf());
    let app = router(engine(), &config);
    let (status, _, body) = get(&app, "/").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "<h1>studio</h1>");
    let (status, _, _) = get(&app, "/api/rules").await;
    assert_eq!(status, StatusCode::OK);
}
