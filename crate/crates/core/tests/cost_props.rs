use proptest::prelude::*;
use sflow_core::cost::{estimate_fixed_cost, estimate_variable_cost, Footprint, PricingTable, Usage};
use sflow_core::metrics::normalized_overhead;
use sflow_core::model::ExecutorKind;
use sflow_core::workloads::DagShapeStats;

fn usage() -> impl Strategy<Value = Usage> {
    (1u64..5000, 1u64..500, any::<bool>(), 1.0f64..900.0, 1u32..4).prop_map(
        |(tasks, runs, container, avg, windows)| Usage {
            tasks,
            runs,
            executor: if container { ExecutorKind::Container } else { ExecutorKind::Function },
            worker_seconds: tasks as f64 * avg,
            windows,
        },
    )
}

fn scaled(p: &PricingTable, k: f64) -> PricingTable {
    let mut q = p.clone();
    for price in [
        &mut q.function_gb_second,
        &mut q.function_request,
        &mut q.orchestrator_state_transition,
        &mut q.storage_get_per_1k,
        &mut q.storage_put_per_1k,
        &mut q.bus_event_per_million,
        &mut q.queue_request_per_million,
        &mut q.fifo_queue_request_per_million,
        &mut q.container_vcpu_hour,
        &mut q.container_gb_hour,
    ] {
        *price *= k;
    }
    for c in &mut q.fixed_components {
        c.daily *= k;
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn prices_scale_totals(u in usage(), k in 0.1f64..10.0) {
        let p = PricingTable::default();
        let f = Footprint::default();
        let a = estimate_variable_cost(&u, &p, &f).unwrap();
        let b = estimate_variable_cost(&u, &scaled(&p, k), &f).unwrap();
        prop_assert!((b.variable_total - k * a.variable_total).abs() <= 1e-9 * b.variable_total.max(1.0));
        for ha in [true, false] {
            let a = estimate_fixed_cost(ha, &p).fixed_daily;
            let b = estimate_fixed_cost(ha, &scaled(&p, k)).fixed_daily;
            prop_assert!((b - k * a).abs() < 1e-9);
        }
    }

    #[test]
    fn totals_are_sums_of_items(u in usage(), ha in any::<bool>()) {
        let p = PricingTable::default();
        let mut ledger = estimate_variable_cost(&u, &p, &Footprint::default()).unwrap();
        let sum: f64 = ledger.items.iter().map(|i| i.subtotal).sum();
        prop_assert!((sum - ledger.variable_total).abs() < 1e-9);
        prop_assert!(ledger.items.iter().all(|i| i.subtotal >= 0.0));
        let fixed = estimate_fixed_cost(ha, &p);
        let expected = ledger.variable_total + fixed.fixed_daily;
        ledger.extend(fixed);
        prop_assert!((ledger.total() - expected).abs() < 1e-9);
    }

    #[test]
    fn more_work_never_costs_less(u in usage(), extra in 0.0f64..1000.0) {
        let p = PricingTable::default();
        let f = Footprint::default();
        let base = estimate_variable_cost(&u, &p, &f).unwrap().variable_total;
        let mut more = u.clone();
        more.worker_seconds += extra;
        prop_assert!(estimate_variable_cost(&more, &p, &f).unwrap().variable_total >= base - 1e-12);
        more.tasks += 1;
        prop_assert!(estimate_variable_cost(&more, &p, &f).unwrap().variable_total >= base - 1e-12);
    }

    #[test]
    fn normalized_overhead_grows_with_makespan(
        p_d in 0.0f64..1000.0, a in 0.0f64..500.0, b in 0.0f64..500.0,
        n_l in 1usize..50, n_w in 1usize..200,
    ) {
        let s = DagShapeStats { n: n_l.max(n_w), p_d, n_l, n_w };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(normalized_overhead(p_d + lo, &s) <= normalized_overhead(p_d + hi, &s));
        prop_assert_eq!(normalized_overhead(p_d, &s), 0.0);
    }
}

#[test]
fn no_usage_costs_nothing() {
    let u = Usage {
        tasks: 0,
        runs: 0,
        executor: ExecutorKind::Function,
        worker_seconds: 0.0,
        windows: 0,
    };
    let l = estimate_variable_cost(&u, &PricingTable::default(), &Footprint::default()).unwrap();
    assert_eq!(l.total(), 0.0);
}
