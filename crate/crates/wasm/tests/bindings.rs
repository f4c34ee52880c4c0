use isingtest_wasm::{exact_marginals_json, majority_success, power_curve_json, sign_guess_curve_points};

#[test]
fn marginals_of_a_single_edge() {
    let out = exact_marginals_json(r#"{"n": 3, "node_theta": [0, 0, 0.5], "edges": [[0, 1, 0.5]]}"#).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["pair"][0][1].as_f64().unwrap() - 0.5f64.tanh()).abs() < 1e-12);
    assert!((v["node"][2].as_f64().unwrap() - 0.5f64.tanh()).abs() < 1e-12);
    assert!(v["covariance"][0][2].as_f64().unwrap().abs() < 1e-12);
    assert!(exact_marginals_json(r#"{"n": 2, "node_theta": [0, 0], "edges": [[0, 0, 1]]}"#).is_err());
    let big = format!(r#"{{"n": 15, "node_theta": {:?}, "edges": []}}"#, vec![0.0; 15]);
    assert!(exact_marginals_json(&big).is_err());
}

#[test]
fn majority_success_small_cases() {
    // k = 1: p; k = 2: p^2 + p q; k = 3: p^3 + 3 p^2 q.
    let lambda = 0.2;
    let (p, q) = (0.6, 0.4);
    assert!((majority_success(1, lambda) - p).abs() < 1e-12);
    assert!((majority_success(2, lambda) - (p * p + p * q)).abs() < 1e-12);
    assert!((majority_success(3, lambda) - (p * p * p + 3.0 * p * p * q)).abs() < 1e-12);
    assert!((majority_success(40, 0.0) - 0.5).abs() < 1e-12);
}

#[test]
fn advantage_curve_tracks_the_exact_value() {
    let pts = sign_guess_curve_points(0.1, 64, 20_000, 3).unwrap();
    assert_eq!(pts.iter().map(|p| p.k).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6, 7, 8, 16, 32, 64]);
    for p in &pts {
        assert!((p.empirical - p.exact).abs() < 0.015, "{p:?}");
        assert!(p.exact >= p.floor);
    }
    assert_eq!(pts, sign_guess_curve_points(0.1, 64, 20_000, 3).unwrap());
    assert!(sign_guess_curve_points(1.5, 8, 10, 0).is_err());
}

#[test]
fn power_curve_on_a_matching() {
    let spec = r#"{
        "tester": "ferro-ind",
        "instances": [
            {"name": "null", "family": "uniform", "n": 8},
            {"name": "matching", "family": "random-matching", "n": 8, "eps": 0.5, "seed": 1}
        ],
        "budgets": [100, 1000],
        "trials": 20,
        "seed": 4,
        "config": {"epsilon": 0.5, "max_degree": 1}
    }"#;
    let v: serde_json::Value = serde_json::from_str(&power_curve_json(spec).unwrap()).unwrap();
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    let rate = |name: &str, budget: u64| {
        cells.iter().find(|c| c["instance"] == name && c["budget"] == budget).unwrap()["reject_rate"].as_f64().unwrap()
    };
    assert!(rate("matching", 1000) >= 0.8);
    assert!(rate("null", 1000) <= 0.2);
    assert_eq!(v["power"][1]["d_max"], 1);

    let too_many = spec.replace("\"trials\": 20", "\"trials\": 2000");
    assert!(power_curve_json(&too_many).is_err());
}

#[test]
fn page_default_spec_runs_for_every_listed_tester() {
    let (n, eps) = (10usize, 0.3f64);
    let delta = (3.0 * eps / n as f64).sqrt();
    for tester in ["loc-ind", "forest-ind", "ferro-ind", "ltt-ind"] {
        let spec = serde_json::json!({
            "tester": tester,
            "instances": [
                {"name": "uniform", "family": "uniform", "n": n},
                {"name": "matching", "family": "random-matching", "n": n, "eps": eps, "seed": 1}
            ],
            "budgets": [100, 1600, 25600],
            "trials": 10,
            "seed": 7,
            "config": {"epsilon": eps, "beta": delta, "max_degree": 1, "edge_bound": n / 2}
        });
        let v: serde_json::Value = serde_json::from_str(&power_curve_json(&spec.to_string()).unwrap()).unwrap();
        let cells = v["cells"].as_array().unwrap();
        assert_eq!(cells.len(), 6, "{tester}");
        assert!(cells.iter().all(|c| c["error"].is_null()), "{tester}: {cells:?}");
        assert!(v["power"].as_array().unwrap().iter().any(|p| p["instance"] == "matching"));
    }
}
