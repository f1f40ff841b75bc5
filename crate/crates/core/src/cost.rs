//! Daily monetary cost of running workloads on the event-driven system and
//! on the managed polling baseline.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ExecutorKind;
use crate::platform::{System, TraceLog};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Unit prices in USD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingTable {
    pub function_gb_second: f64,
    pub function_request: f64,
    pub orchestrator_state_transition: f64,
    pub storage_get_per_1k: f64,
    pub storage_put_per_1k: f64,
    pub bus_event_per_million: f64,
    pub queue_request_per_million: f64,
    pub fifo_queue_request_per_million: f64,
    pub container_vcpu_hour: f64,
    pub container_gb_hour: f64,
    pub fixed_components: Vec<FixedComponent>,
    pub baseline_env_daily: f64,
    pub baseline_worker_hour: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedComponent {
    pub name: String,
    pub spec: String,
    pub daily: f64,
    /// Doubled in the high-availability setup.
    pub redundant: bool,
}

impl FixedComponent {
    fn new(name: &str, spec: &str, daily: f64, redundant: bool) -> Self {
        FixedComponent {
            name: name.into(),
            spec: spec.into(),
            daily,
            redundant,
        }
    }
}

impl Default for PricingTable {
    fn default() -> Self {
        PricingTable {
            function_gb_second: 0.000_016_666_7,
            function_request: 0.000_000_2,
            orchestrator_state_transition: 0.000_025,
            storage_get_per_1k: 0.000_4,
            storage_put_per_1k: 0.005,
            bus_event_per_million: 1.0,
            queue_request_per_million: 0.40,
            fifo_queue_request_per_million: 0.50,
            container_vcpu_hour: 0.040_48,
            // fitted to the 24 h container line
            container_gb_hour: 0.004_443_333_3,
            fixed_components: vec![
                FixedComponent::new("RDS", "db.t3.small, 20 GB SSD", 0.94, true),
                FixedComponent::new("DMS", "t3.small, 10 GB SSD", 0.90, true),
                FixedComponent::new("Kinesis", "data streams", 0.72, false),
                FixedComponent::new("NAT", "t2.micro on-demand", 0.275, true),
                FixedComponent::new("ECR", "container images, 11 x 400 MB", 0.02, false),
                FixedComponent::new("SQL proxy", "", 0.72, false),
                FixedComponent::new("AppRunner", "2 GB memory, stopped", 0.34, false),
            ],
            baseline_env_daily: 11.76,
            baseline_worker_hour: 0.055,
        }
    }
}

const PRICE_KEYS: [&str; 13] = [
    "function_gb_second",
    "function_request",
    "orchestrator_state_transition",
    "storage_get_per_1k",
    "storage_put_per_1k",
    "bus_event_per_million",
    "queue_request_per_million",
    "fifo_queue_request_per_million",
    "container_vcpu_hour",
    "container_gb_hour",
    "fixed_components",
    "baseline_env_daily",
    "baseline_worker_hour",
];

impl PricingTable {
    /// Parses a full price table; every price must be present.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        for key in PRICE_KEYS {
            if value.get(key).is_none() {
                return Err(Error::MissingPrice(key.to_string()));
            }
        }
        let table: PricingTable = serde_json::from_value(value)?;
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let prices = [
            ("function_gb_second", self.function_gb_second),
            ("function_request", self.function_request),
            ("orchestrator_state_transition", self.orchestrator_state_transition),
            ("storage_get_per_1k", self.storage_get_per_1k),
            ("storage_put_per_1k", self.storage_put_per_1k),
            ("bus_event_per_million", self.bus_event_per_million),
            ("queue_request_per_million", self.queue_request_per_million),
            ("fifo_queue_request_per_million", self.fifo_queue_request_per_million),
            ("container_vcpu_hour", self.container_vcpu_hour),
            ("container_gb_hour", self.container_gb_hour),
            ("baseline_env_daily", self.baseline_env_daily),
            ("baseline_worker_hour", self.baseline_worker_hour),
        ];
        let fixed = self.fixed_components.iter().map(|c| (c.name.as_str(), c.daily));
        for (name, price) in prices.into_iter().chain(fixed) {
            if !(price >= 0.0 && price.is_finite()) {
                return Err(Error::InvalidConfig(format!("price {name} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Per-invocation resource shape of the control plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Footprint {
    pub worker_memory_mb: f64,
    pub executor_memory_mb: f64,
    pub executor_duration_s: f64,
    pub scheduler_memory_mb: f64,
    pub scheduler_duration_s: f64,
    pub forwarder_memory_mb: f64,
    pub forwarder_duration_s: f64,
    pub container_vcpu: f64,
    pub container_memory_gb: f64,
    pub scheduler_batch: u64,
    pub events_per_task: u64,
    pub events_per_run: u64,
    pub transitions_per_task: u64,
    pub fifo_poll_interval_s: f64,
    pub queue_poll_interval_s: f64,
}

impl Default for Footprint {
    fn default() -> Self {
        Footprint {
            worker_memory_mb: 340.0,
            executor_memory_mb: 256.0,
            executor_duration_s: 1.0,
            scheduler_memory_mb: 512.0,
            scheduler_duration_s: 10.0,
            forwarder_memory_mb: 512.0,
            forwarder_duration_s: 1.0,
            container_vcpu: 0.25,
            container_memory_gb: 0.5,
            scheduler_batch: 10,
            events_per_task: 15,
            events_per_run: 15,
            transitions_per_task: 4,
            fifo_poll_interval_s: 20.0,
            queue_poll_interval_s: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Fixed,
    Variable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineItem {
    pub component: String,
    pub notes: String,
    pub category: Category,
    pub quantity: f64,
    pub unit: String,
    pub unit_price: f64,
    pub subtotal: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub items: Vec<LineItem>,
    pub fixed_daily: f64,
    pub variable_total: f64,
}

impl CostLedger {
    pub fn push(&mut self, item: LineItem) {
        match item.category {
            Category::Fixed => self.fixed_daily += item.subtotal,
            Category::Variable => self.variable_total += item.subtotal,
        }
        self.items.push(item);
    }

    pub fn extend(&mut self, other: CostLedger) {
        for item in other.items {
            self.push(item);
        }
    }

    pub fn total(&self) -> f64 {
        self.fixed_daily + self.variable_total
    }

    pub fn item(&self, component: &str) -> Option<&LineItem> {
        self.items.iter().find(|i| i.component == component)
    }

    /// `Component,Notes,Cost` with a closing `Total` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["Component", "Notes", "Cost"])?;
        for i in &self.items {
            w.write_record([i.component.as_str(), &i.notes, &format!("{:.4}", i.subtotal)])?;
        }
        w.write_record(["Total", "", &format!("{:.4}", self.total())])?;
        w.flush()?;
        Ok(())
    }
}

fn item(
    component: &str,
    notes: String,
    category: Category,
    quantity: f64,
    unit: &str,
    subtotal: f64,
) -> LineItem {
    LineItem {
        component: component.to_string(),
        notes,
        category,
        quantity,
        unit: unit.to_string(),
        unit_price: if quantity > 0.0 { subtotal / quantity } else { 0.0 },
        subtotal,
    }
}

/// Counted activity over whole 24 h windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Usage {
    /// Worker invocations (task attempts).
    pub tasks: u64,
    pub runs: u64,
    pub executor: ExecutorKind,
    /// Sum of task workloads in seconds, as billed to the worker.
    pub worker_seconds: f64,
    pub windows: u32,
}

impl Usage {
    /// Counts attempts and runs in an event-driven trace. A trace without
    /// attempts covers no billing window.
    pub fn from_trace(trace: &TraceLog) -> Result<Self> {
        if trace.system == System::Baseline {
            return Err(Error::InvalidConfig(
                "baseline traces are priced with the baseline model".into(),
            ));
        }
        let tasks = trace.attempts.len() as u64;
        let executor = if trace
            .attempts
            .iter()
            .filter(|a| a.duration_s > 0.0)
            .any(|a| a.executor == ExecutorKind::Container)
        {
            ExecutorKind::Container
        } else {
            ExecutorKind::Function
        };
        let windows = if tasks == 0 {
            0
        } else {
            ((trace.end_time / SECONDS_PER_DAY).ceil() as u32).max(1)
        };
        Ok(Usage {
            tasks,
            runs: trace.store.runs.len() as u64,
            executor,
            worker_seconds: trace.attempts.iter().map(|a| a.duration_s).sum(),
            windows,
        })
    }
}

fn function_cost(p: &PricingTable, invocations: f64, seconds_each: f64, memory_mb: f64) -> f64 {
    invocations * seconds_each * (memory_mb / 1024.0) * p.function_gb_second
        + invocations * p.function_request
}

pub fn estimate_variable_cost(
    usage: &Usage,
    pricing: &PricingTable,
    footprint: &Footprint,
) -> Result<CostLedger> {
    pricing.validate()?;
    let f = footprint;
    let mut ledger = CostLedger::default();
    if usage.windows == 0 {
        return Ok(ledger);
    }
    let v = Category::Variable;
    let tasks = usage.tasks as f64;
    let avg = if usage.tasks > 0 { usage.worker_seconds / tasks } else { 0.0 };

    match usage.executor {
        ExecutorKind::Function => {
            let gb_s = usage.worker_seconds * (f.worker_memory_mb / 1024.0) * pricing.function_gb_second;
            ledger.push(item(
                "Function Worker",
                format!(
                    "{} invocations, {} MB, {:.0} s each",
                    usage.tasks, f.worker_memory_mb, avg
                ),
                v,
                tasks,
                "invocation",
                gb_s + tasks * pricing.function_request,
            ));
        }
        ExecutorKind::Container => {
            let hours = usage.worker_seconds / 3600.0;
            let hourly = f.container_vcpu * pricing.container_vcpu_hour
                + f.container_memory_gb * pricing.container_gb_hour;
            ledger.push(item(
                "Container Worker",
                format!(
                    "{} invocations, {} vCPU, {} GB, {:.2} h in total",
                    usage.tasks, f.container_vcpu, f.container_memory_gb, hours
                ),
                v,
                hours,
                "hour",
                hours * hourly,
            ));
        }
    }
    let executor_name = match usage.executor {
        ExecutorKind::Function => "Function Executor",
        ExecutorKind::Container => "Container Executor",
    };
    ledger.push(item(
        executor_name,
        format!(
            "{} invocations, {} MB, {} s each",
            usage.tasks, f.executor_memory_mb, f.executor_duration_s
        ),
        v,
        tasks,
        "invocation",
        function_cost(pricing, tasks, f.executor_duration_s, f.executor_memory_mb),
    ));

    let events = f.events_per_task * usage.tasks + f.events_per_run * usage.runs;
    let passes = events.div_ceil(f.scheduler_batch.max(1)) as f64;
    ledger.push(item(
        "Scheduler",
        format!(
            "{passes} invocations, {} MB, {} s each; {events} events in batches of {}",
            f.scheduler_memory_mb, f.scheduler_duration_s, f.scheduler_batch
        ),
        v,
        passes,
        "invocation",
        function_cost(pricing, passes, f.scheduler_duration_s, f.scheduler_memory_mb),
    ));
    ledger.push(item(
        "CDC forwarder",
        format!(
            "{passes} invocations, {} MB, {} s each",
            f.forwarder_memory_mb, f.forwarder_duration_s
        ),
        v,
        passes,
        "invocation",
        function_cost(pricing, passes, f.forwarder_duration_s, f.forwarder_memory_mb),
    ));
    let transitions = (f.transitions_per_task * usage.tasks) as f64;
    ledger.push(item(
        "Step functions",
        format!("{} invocations, {} transitions each", usage.tasks, f.transitions_per_task),
        v,
        transitions,
        "transition",
        transitions * pricing.orchestrator_state_transition,
    ));
    ledger.push(item(
        "DAG files pull",
        format!("{} GET requests", usage.tasks),
        v,
        tasks,
        "request",
        tasks * pricing.storage_get_per_1k / 1000.0,
    ));
    ledger.push(item(
        "Push task logs",
        format!("{} PUT requests", usage.tasks),
        v,
        tasks,
        "request",
        tasks * pricing.storage_put_per_1k / 1000.0,
    ));
    let bus = (f.events_per_task * usage.tasks) as f64;
    ledger.push(item(
        "Eventbridge",
        format!("{} * {} events", usage.tasks, f.events_per_task),
        v,
        bus,
        "event",
        bus * pricing.bus_event_per_million / 1e6,
    ));
    let windows = usage.windows as f64;
    let fifo = (SECONDS_PER_DAY / f.fifo_poll_interval_s).floor() * windows;
    ledger.push(item(
        "SQS FIFO",
        format!("{fifo} polls, one per {} s", f.fifo_poll_interval_s),
        v,
        fifo,
        "request",
        fifo * pricing.fifo_queue_request_per_million / 1e6,
    ));
    let std_polls = (SECONDS_PER_DAY / f.queue_poll_interval_s).floor() * windows;
    ledger.push(item(
        "SQS",
        format!("{std_polls} polls, one per {} s", f.queue_poll_interval_s),
        v,
        std_polls,
        "request",
        std_polls * pricing.queue_request_per_million / 1e6,
    ));
    Ok(ledger)
}

pub fn estimate_fixed_cost(ha: bool, pricing: &PricingTable) -> CostLedger {
    let mut ledger = CostLedger::default();
    for c in &pricing.fixed_components {
        let copies = if ha && c.redundant { 2.0 } else { 1.0 };
        ledger.push(item(
            &c.name,
            c.spec.clone(),
            Category::Fixed,
            copies,
            "instance-day",
            copies * c.daily,
        ));
    }
    ledger
}

/// Environment fee plus additional worker hours.
pub fn baseline_cost(
    days: f64,
    added_worker_hours: f64,
    pricing: &PricingTable,
) -> CostLedger {
    let mut ledger = CostLedger::default();
    ledger.push(item(
        "Environment",
        "small environment with one worker".into(),
        Category::Fixed,
        days,
        "day",
        days * pricing.baseline_env_daily,
    ));
    ledger.push(item(
        "Workers",
        format!("{added_worker_hours:.2} additional worker hours"),
        Category::Variable,
        added_worker_hours,
        "hour",
        added_worker_hours * pricing.baseline_worker_hour,
    ));
    ledger
}

/// Prices a baseline trace from its worker spans.
pub fn estimate_baseline_cost(trace: &TraceLog, pricing: &PricingTable) -> Result<CostLedger> {
    if trace.system != System::Baseline {
        return Err(Error::InvalidConfig("not a baseline trace".into()));
    }
    let hours: f64 = trace
        .workers
        .iter()
        .filter(|w| !w.base)
        .map(|w| w.up_s(trace.end_time))
        .sum::<f64>()
        / 3600.0;
    let days = ((trace.end_time / SECONDS_PER_DAY).ceil()).max(1.0);
    Ok(baseline_cost(days, hours, pricing))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostScenario {
    /// 50 parallel 3 min tasks every 3 minutes, 20 runs.
    Heavy,
    /// The heavy load on containers.
    HeavyCaas,
    /// 400 tasks of 1 min every 4 hours, 6 runs, 35 wide.
    Distributed,
    /// A 20-task chain of 30 s tasks once a day.
    Sporadic,
    /// 100 parallel 24 h container tasks once a day.
    Constant,
}

impl CostScenario {
    pub const ALL: [CostScenario; 5] = [
        CostScenario::Heavy,
        CostScenario::HeavyCaas,
        CostScenario::Distributed,
        CostScenario::Sporadic,
        CostScenario::Constant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CostScenario::Heavy => "scenario1",
            CostScenario::HeavyCaas => "scenario1_caas",
            CostScenario::Distributed => "scenario2",
            CostScenario::Sporadic => "scenario3",
            CostScenario::Constant => "scenario4",
        }
    }

    /// (tasks per run, runs, task seconds, peak parallel tasks)
    fn shape(self) -> (u64, u64, f64, u64) {
        match self {
            CostScenario::Heavy | CostScenario::HeavyCaas => (50, 20, 180.0, 50),
            CostScenario::Distributed => (400, 6, 60.0, 35),
            CostScenario::Sporadic => (20, 1, 30.0, 1),
            CostScenario::Constant => (100, 1, 86_400.0, 100),
        }
    }

    pub fn executor(self) -> ExecutorKind {
        match self {
            CostScenario::HeavyCaas | CostScenario::Constant => ExecutorKind::Container,
            _ => ExecutorKind::Function,
        }
    }

    pub fn usage(self) -> Usage {
        let (per_run, runs, secs, _) = self.shape();
        Usage {
            tasks: per_run * runs,
            runs,
            executor: self.executor(),
            worker_seconds: (per_run * runs) as f64 * secs,
            windows: 1,
        }
    }

    /// Additional baseline worker hours: enough workers for the peak width,
    /// kept up while each run executes.
    pub fn baseline_worker_hours(self, slots_per_worker: u64, min_workers: u64) -> f64 {
        let (_, runs, secs, width) = self.shape();
        let added = width.div_ceil(slots_per_worker).saturating_sub(min_workers);
        let hours_per_run = match self {
            CostScenario::Heavy | CostScenario::HeavyCaas => 1.0 / runs as f64,
            CostScenario::Distributed => 1.0,
            CostScenario::Sporadic => 0.0,
            CostScenario::Constant => secs / 3600.0,
        };
        added as f64 * runs as f64 * hours_per_run
    }
}

impl fmt::Display for CostScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostScenario::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Round up to whole cents.
pub fn ceil_cents(x: f64) -> f64 {
    ((x * 100.0) - 1e-6).ceil() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub name: String,
    pub executor: String,
    pub fixed: f64,
    pub variable: f64,
    pub total: f64,
}

impl CostSummary {
    /// Summary row for a combined ledger, each column rounded up to cents.
    pub fn of(name: &str, executor: &str, ledger: &CostLedger) -> Self {
        CostSummary {
            name: name.to_string(),
            executor: executor.to_string(),
            fixed: ceil_cents(ledger.fixed_daily),
            variable: ceil_cents(ledger.variable_total),
            total: ceil_cents(ledger.total()),
        }
    }
}

/// Fixed (HA) plus variable cost of a closed-form scenario.
pub fn scenario_ledger(scenario: CostScenario, pricing: &PricingTable) -> Result<CostLedger> {
    let mut ledger = estimate_fixed_cost(true, pricing);
    ledger.extend(estimate_variable_cost(
        &scenario.usage(),
        pricing,
        &Footprint::default(),
    )?);
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variable(s: CostScenario) -> CostLedger {
        estimate_variable_cost(&s.usage(), &PricingTable::default(), &Footprint::default()).unwrap()
    }

    #[test]
    fn heavy_line_items() {
        let l = variable(CostScenario::Heavy);
        let sub = |c: &str| l.item(c).unwrap().subtotal;
        assert!((sub("Function Worker") - 0.9963).abs() < 1e-3);
        assert!((sub("Function Executor") - 0.0044).abs() < 1e-3);
        assert!((sub("Scheduler") - 0.1278).abs() < 1e-3);
        assert_eq!(l.item("Scheduler").unwrap().quantity, 1530.0);
        assert!((sub("Step functions") - 0.1).abs() < 1e-9);
        assert!((l.variable_total - 1.2677).abs() < 5e-3);
    }

    #[test]
    fn scheduler_invocation_counts() {
        let q = |s: CostScenario| variable(s).item("Scheduler").unwrap().quantity;
        assert_eq!(q(CostScenario::Distributed), 3609.0);
        assert_eq!(q(CostScenario::Sporadic), 32.0);
        assert_eq!(q(CostScenario::Constant), 152.0);
    }

    #[test]
    fn fixed_daily() {
        let p = PricingTable::default();
        assert!((estimate_fixed_cost(true, &p).fixed_daily - 6.03).abs() < 1e-9);
        assert!((estimate_fixed_cost(false, &p).fixed_daily - 3.915).abs() < 1e-9);
        let empty = PricingTable {
            fixed_components: vec![],
            ..p
        };
        assert_eq!(estimate_fixed_cost(true, &empty).fixed_daily, 0.0);
    }

    #[test]
    fn summary_rounds_up() {
        let p = PricingTable::default();
        let expected = [
            (CostScenario::Heavy, 7.30),
            (CostScenario::HeavyCaas, 6.92),
            (CostScenario::Distributed, 7.47),
            (CostScenario::Sporadic, 6.05),
            (CostScenario::Constant, 35.69),
        ];
        for (s, total) in expected {
            let l = scenario_ledger(s, &p).unwrap();
            assert_eq!(CostSummary::of(s.as_str(), "", &l).total, total, "{s}");
        }
    }

    #[test]
    fn baseline_closed_form() {
        let p = PricingTable::default();
        let workers = |s: CostScenario| {
            baseline_cost(1.0, s.baseline_worker_hours(5, 1), &p).variable_total
        };
        assert!((workers(CostScenario::Heavy) - 0.495).abs() < 1e-9);
        assert!((workers(CostScenario::Distributed) - 1.98).abs() < 1e-9);
        assert_eq!(workers(CostScenario::Sporadic), 0.0);
        assert!((workers(CostScenario::Constant) - 19.0 * 24.0 * 0.055).abs() < 1e-9);
    }

    #[test]
    fn ledger_is_additive() {
        let l = scenario_ledger(CostScenario::Distributed, &PricingTable::default()).unwrap();
        let sum: f64 = l.items.iter().map(|i| i.subtotal).sum();
        assert_eq!(l.total(), l.fixed_daily + l.variable_total);
        assert!((l.total() - sum).abs() < 1e-12);
    }

    #[test]
    fn missing_or_negative_prices_are_rejected() {
        let mut v = serde_json::to_value(PricingTable::default()).unwrap();
        v.as_object_mut().unwrap().remove("function_request");
        assert!(matches!(
            PricingTable::from_json(&v.to_string()),
            Err(Error::MissingPrice(k)) if k == "function_request"
        ));
        let text = serde_json::to_string(&PricingTable::default()).unwrap();
        assert_eq!(PricingTable::from_json(&text).unwrap(), PricingTable::default());
        let bad = PricingTable {
            function_request: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_has_total_row() {
        let mut out = Vec::new();
        variable(CostScenario::Sporadic).write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("Component,Notes,Cost\n"));
        assert!(text.trim_end().ends_with("Total,,0.0144"), "{text}");
    }

    #[test]
    fn unknown_scenario() {
        assert!(matches!("scenario9".parse::<CostScenario>(), Err(Error::UnknownScenario(_))));
    }
}
