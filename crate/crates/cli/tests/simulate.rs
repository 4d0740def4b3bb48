mod support;

use std::fs;
use std::path::Path;
use std::process::Command;

use desksim::outcome_log::read_outcomes;
use desksim::Decision;
use desksim_cli::artifacts::{read_transcripts, MANIFEST_FILE, OUTCOMES_FILE, TRANSCRIPTS_FILE};
use desksim_cli::config::RunConfig;
use desksim_cli::manifest::RunManifest;
use desksim_cli::simulate::simulate;
use support::*;

fn config(dir: &Path, corpus: &Corpus, strategies: &str, extra_backends: &str) -> RunConfig {
    let text = format!(
        "[corpus]\nnews = {news}\n\n{backends}{extra_backends}\n{strategies}\n[run]\ncache_dir = \"cache\"\noutput_dir = \"out\"\nworkers = 3\n",
        news = toml_str(&corpus.news().display().to_string()),
        backends = desk_backends(&corpus.ids),
    );
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    RunConfig::load(&path).unwrap()
}

const HO: &str = "[[strategies]]\nkind = \"ho\"\nanalyst = \"analyst\"\ntrader = \"trader\"\nhead = \"head\"\n";
const SINGLE: &str = "[[strategies]]\nkind = \"single_trader\"\ntrader = \"trader\"\n";

#[test]
fn three_article_smoke_run() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = Corpus::write(&tmp.path().join("data"), 3);
    let cfg = config(tmp.path(), &corpus, SINGLE, "");
    let summary = simulate(&cfg, &no_env).unwrap();
    assert_eq!((summary.outcomes, summary.skipped), (3, 0));

    let out = tmp.path().join("out");
    let outcomes = read_outcomes(out.join(OUTCOMES_FILE)).unwrap();
    let decisions: Vec<_> = outcomes.iter().map(|o| o.decision()).collect();
    assert_eq!(decisions, vec![Some(Decision::Overweight), Some(Decision::Underweight), Some(Decision::Neutral)]);

    let manifest = RunManifest::read(&out.join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.coverage.skipped, 0);
    assert_eq!(manifest.coverage.outcomes, 3);
    assert_eq!(manifest.config_digest, cfg.digest());
    assert_eq!(manifest.template_digests.len(), 6);
    assert_eq!(manifest.backends["trader"].reported_model.as_deref(), Some("scripted"));

    let transcripts = read_transcripts(&out.join(TRANSCRIPTS_FILE)).unwrap();
    assert_eq!(transcripts.len(), 3);
    for o in &outcomes {
        let r = o.transcript_ref;
        let calls = &transcripts[r.first as usize..(r.first + u64::from(r.count)) as usize];
        assert!(calls.iter().all(|c| c.call.article_id == o.article_id));
        assert_eq!(calls[0].id, r.first);
    }
}

#[test]
fn hierarchical_run_follows_the_script() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = Corpus::write(&tmp.path().join("data"), 6);
    let cfg = config(tmp.path(), &corpus, HO, "");
    simulate(&cfg, &no_env).unwrap();
    let outcomes = read_outcomes(tmp.path().join("out").join(OUTCOMES_FILE)).unwrap();
    for (i, o) in outcomes.iter().enumerate() {
        o.check_invariants().unwrap();
        let expected = match (action_for(i), i % 3 == 0) {
            ("neither", _) | (_, true) => Decision::Neutral,
            ("long", false) => Decision::Overweight,
            _ => Decision::Underweight,
        };
        assert_eq!(o.decision(), Some(expected), "article {i}");
        assert_eq!(o.head_verdict.is_some(), action_for(i) != "neither");
    }
}

#[test]
fn rerun_is_idempotent_and_served_from_cache() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = Corpus::write(&tmp.path().join("data"), 9);
    let cfg = config(tmp.path(), &corpus, HO, "");

    // an interrupted run that only reached the first four articles
    let partial_news = tmp.path().join("partial.jsonl");
    let lines: Vec<String> = fs::read_to_string(corpus.news()).unwrap().lines().take(4).map(String::from).collect();
    fs::write(&partial_news, lines.join("\n")).unwrap();
    let mut partial = cfg.clone();
    partial.corpus.news = Some(partial_news);
    partial.run.output_dir = tmp.path().join("partial-out");
    simulate(&partial, &no_env).unwrap();

    let first = simulate(&cfg, &no_env).unwrap();
    assert!(first.gateway.cache_hits > 0);
    let first_log = fs::read(tmp.path().join("out").join(OUTCOMES_FILE)).unwrap();

    let second = simulate(&cfg, &no_env).unwrap();
    assert_eq!(second.gateway.backend_calls, 0);
    let second_log = fs::read(tmp.path().join("out").join(OUTCOMES_FILE)).unwrap();
    assert_eq!(first_log, second_log);

    let mut fresh = cfg.clone();
    fresh.run.cache_dir = tmp.path().join("fresh-cache");
    fresh.run.output_dir = tmp.path().join("fresh-out");
    fresh.run.workers = 1;
    simulate(&fresh, &no_env).unwrap();
    assert_eq!(fs::read(tmp.path().join("fresh-out").join(OUTCOMES_FILE)).unwrap(), first_log);
}

#[test]
fn missing_credentials_stop_before_any_output() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = Corpus::write(&tmp.path().join("data"), 3);
    let remote = "[backends.gpt]\nkind = \"openai\"\nmodel = \"m\"\napi_key_env = \"DESKSIM_TEST_ABSENT_KEY\"\n";
    let strategies = "[[strategies]]\nkind = \"single_trader\"\ntrader = \"gpt\"\n";
    config(tmp.path(), &corpus, strategies, remote);
    let status = Command::new(bin())
        .args(["simulate", "--config"])
        .arg(tmp.path().join("run.toml"))
        .env_remove("DESKSIM_TEST_ABSENT_KEY")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(String::from_utf8_lossy(&status.stderr).contains("DESKSIM_TEST_ABSENT_KEY"));
    assert!(!tmp.path().join("out").exists());
    assert!(!tmp.path().join("cache").exists());
}

#[test]
fn exit_codes_for_data_errors_and_partial_skips() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = Corpus::write(&tmp.path().join("data"), 4);
    config(tmp.path(), &corpus, SINGLE, "");
    let run = |extra: &[&str]| {
        Command::new(bin())
            .args(["simulate", "--config"])
            .arg(tmp.path().join("run.toml"))
            .args(extra)
            .output()
            .unwrap()
    };
    assert_eq!(run(&[]).status.code(), Some(0));

    let broken = tmp.path().join("broken.jsonl");
    fs::write(&broken, "{not json}\n").unwrap();
    let out = run(&["--news", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    // an article the trader script has no rule for yields an empty reply
    let extra = tmp.path().join("extra.jsonl");
    let mut news = fs::read_to_string(corpus.news()).unwrap();
    news.push_str(r#"{"id":"zz","date":"2024-01-03","ticker":"2330","title":"t","content":"unscripted"}"#);
    fs::write(&extra, news).unwrap();
    let out = run(&["--news", extra.to_str().unwrap(), "--output-dir", tmp.path().join("o2").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = RunManifest::read(&tmp.path().join("o2").join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.coverage.skipped, 1);

    let bad_config = tmp.path().join("bad.toml");
    fs::write(&bad_config, "[run]\nworkers = 0\n").unwrap();
    let out = Command::new(bin()).args(["simulate", "--config"]).arg(&bad_config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
