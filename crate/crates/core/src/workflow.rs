//! Workflow DAG model and Pegasus DAX ingestion.
//!
//! A [`Workflow`] is a directed acyclic graph of tasks with reference
//! runtimes (seconds on the fastest server) and dataset sizes (bytes) on
//! its edges. Workflows are loaded from Pegasus DAX v3 XML documents or
//! from a minimal line-oriented text format used by tests.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("unknown job reference: {0}")]
    UnknownJobReference(String),
    #[error("negative size {size} for file {file}")]
    NegativeSize { file: String, size: i64 },
    #[error("cycle detected through tasks {0:?}")]
    CycleDetected(Vec<usize>),
    #[error("edge endpoint {index} out of range (workflow has {len} tasks)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("task {id} has non-positive runtime {runtime}")]
    NonPositiveRuntime { id: String, runtime: f64 },
}

/// One node of the DAG. `reference_runtime` is the runtime in seconds on
/// the reference (fastest) server.
#[derive(Debug, Clone)]
pub struct Task {
    pub id: String,
    pub index: usize,
    pub reference_runtime: f64,
}

/// A directed arc carrying `size_bytes` of data from task `from` to `to`.
/// A zero size denotes a pure control dependency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDependency {
    pub from: usize,
    pub to: usize,
    pub size_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct Workflow {
    pub name: String,
    pub tasks: Vec<Task>,
    pub edges: Vec<DataDependency>,
}

impl Workflow {
    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    /// Parent list per task as `(parent index, edge index)` pairs, in edge
    /// declaration order.
    pub fn parents(&self) -> Vec<Vec<(usize, usize)>> {
        let mut parents = vec![Vec::new(); self.tasks.len()];
        for (ei, e) in self.edges.iter().enumerate() {
            parents[e.to].push((e.from, ei));
        }
        parents
    }

    /// Child list per task as `(child index, edge index)` pairs.
    pub fn children(&self) -> Vec<Vec<(usize, usize)>> {
        let mut children = vec![Vec::new(); self.tasks.len()];
        for (ei, e) in self.edges.iter().enumerate() {
            children[e.from].push((e.to, ei));
        }
        children
    }

    /// Structural validation: endpoints in range, runtimes positive, no
    /// cycles. Returns a witness cycle when one exists.
    pub fn validate(&self) -> Result<(), WorkflowError> {
        let len = self.tasks.len();
        for e in &self.edges {
            if e.from >= len {
                return Err(WorkflowError::IndexOutOfRange { index: e.from, len });
            }
            if e.to >= len {
                return Err(WorkflowError::IndexOutOfRange { index: e.to, len });
            }
        }
        for t in &self.tasks {
            if !(t.reference_runtime > 0.0) {
                return Err(WorkflowError::NonPositiveRuntime {
                    id: t.id.clone(),
                    runtime: t.reference_runtime,
                });
            }
        }
        self.topological_order().map(|_| ())
    }

    /// Deterministic topological order: Kahn's algorithm with ready tasks
    /// taken in ascending index order. Errors with a witness cycle if the
    /// graph is not a DAG.
    pub fn topological_order(&self) -> Result<Vec<usize>, WorkflowError> {
        let n = self.tasks.len();
        let mut indegree = vec![0usize; n];
        let mut children = vec![Vec::new(); n];
        for e in &self.edges {
            if e.from >= n {
                return Err(WorkflowError::IndexOutOfRange {
                    index: e.from,
                    len: n,
                });
            }
            if e.to >= n {
                return Err(WorkflowError::IndexOutOfRange {
                    index: e.to,
                    len: n,
                });
            }
            indegree[e.to] += 1;
            children[e.from].push(e.to);
        }
        // Ready set kept sorted ascending; pop the smallest index.
        let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        ready.sort_unstable_by(|a, b| b.cmp(a));
        let mut order = Vec::with_capacity(n);
        while let Some(next) = ready.pop() {
            order.push(next);
            for &c in &children[next] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    let pos = ready.binary_search_by(|x| c.cmp(x)).unwrap_err();
                    ready.insert(pos, c);
                }
            }
        }
        if order.len() < n {
            return Err(WorkflowError::CycleDetected(find_cycle(n, &self.edges)));
        }
        Ok(order)
    }
}

/// Locate one directed cycle for error reporting. Only called once a cycle
/// is known to exist.
fn find_cycle(n: usize, edges: &[DataDependency]) -> Vec<usize> {
    let mut children = vec![Vec::new(); n];
    for e in edges {
        children[e.from].push(e.to);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack = Vec::new();
    fn dfs(
        v: usize,
        children: &[Vec<usize>],
        state: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[v] = 1;
        stack.push(v);
        for &c in &children[v] {
            if state[c] == 1 {
                let start = stack.iter().position(|&x| x == c).unwrap();
                return Some(stack[start..].to_vec());
            }
            if state[c] == 0 {
                if let Some(cycle) = dfs(c, children, state, stack) {
                    return Some(cycle);
                }
            }
        }
        stack.pop();
        state[v] = 2;
        None
    }
    for v in 0..n {
        if state[v] == 0 {
            if let Some(cycle) = dfs(v, &children, &mut state, &mut stack) {
                return cycle;
            }
        }
    }
    Vec::new()
}

/// Parse a Pegasus DAX v3 document.
///
/// Supported subset: `<job id runtime>` elements with `<uses file size
/// link>` children, plus `<child ref><parent ref/></child>` dependency
/// declarations. The dataset size of an edge is the summed size of every
/// file written by the parent and read by the child; an edge declared with
/// no matching files is kept with size zero as a control dependency.
pub fn parse_dax(document: &str) -> Result<Workflow, WorkflowError> {
    let doc = roxmltree::Document::parse(document)
        .map_err(|e| WorkflowError::MalformedDocument(e.to_string()))?;
    let root = doc.root_element();
    let name = root.attribute("name").unwrap_or("workflow").to_string();

    let mut tasks: Vec<Task> = Vec::new();
    let mut index_of: HashMap<String, usize> = HashMap::new();
    // Per task: (input files, output files with sizes)
    let mut inputs: Vec<Vec<String>> = Vec::new();
    let mut outputs: Vec<HashMap<String, u64>> = Vec::new();

    for job in root.descendants().filter(|n| n.has_tag_name_local("job")) {
        let id = job
            .attribute("id")
            .ok_or_else(|| WorkflowError::MalformedDocument("job without id".into()))?
            .to_string();
        let runtime: f64 = job
            .attribute("runtime")
            .ok_or_else(|| WorkflowError::MalformedDocument(format!("job {id} without runtime")))?
            .parse()
            .map_err(|_| WorkflowError::MalformedDocument(format!("job {id}: bad runtime")))?;
        if index_of.contains_key(&id) {
            return Err(WorkflowError::MalformedDocument(format!(
                "duplicate job id {id}"
            )));
        }
        let index = tasks.len();
        index_of.insert(id.clone(), index);

        let mut ins = Vec::new();
        let mut outs = HashMap::new();
        for uses in job.children().filter(|n| n.has_tag_name_local("uses")) {
            let file = uses
                .attribute("file")
                .or_else(|| uses.attribute("name"))
                .ok_or_else(|| {
                    WorkflowError::MalformedDocument(format!("job {id}: uses without file"))
                })?
                .to_string();
            let size: i64 = match uses.attribute("size") {
                Some(s) => s.parse().map_err(|_| {
                    WorkflowError::MalformedDocument(format!("job {id}: bad size for {file}"))
                })?,
                None => 0,
            };
            if size < 0 {
                return Err(WorkflowError::NegativeSize { file, size });
            }
            match uses.attribute("link") {
                Some("input") => ins.push(file),
                Some("output") => {
                    outs.insert(file, size as u64);
                }
                _ => {}
            }
        }
        inputs.push(ins);
        outputs.push(outs);
        tasks.push(Task {
            id,
            index,
            reference_runtime: runtime,
        });
    }

    let mut edges: Vec<DataDependency> = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for child in root.descendants().filter(|n| n.has_tag_name_local("child")) {
        let child_ref = child
            .attribute("ref")
            .ok_or_else(|| WorkflowError::MalformedDocument("child without ref".into()))?;
        let to = *index_of
            .get(child_ref)
            .ok_or_else(|| WorkflowError::UnknownJobReference(child_ref.to_string()))?;
        for parent in child.children().filter(|n| n.has_tag_name_local("parent")) {
            let parent_ref = parent
                .attribute("ref")
                .ok_or_else(|| WorkflowError::MalformedDocument("parent without ref".into()))?;
            let from = *index_of
                .get(parent_ref)
                .ok_or_else(|| WorkflowError::UnknownJobReference(parent_ref.to_string()))?;
            if seen.contains_key(&(from, to)) {
                continue;
            }
            let size: u64 = inputs[to].iter().filter_map(|f| outputs[from].get(f)).sum();
            seen.insert((from, to), edges.len());
            edges.push(DataDependency {
                from,
                to,
                size_bytes: size,
            });
        }
    }

    Ok(Workflow { name, tasks, edges })
}

/// Render a workflow back to a DAX v3 document. Each edge becomes one
/// intermediate file sized to the edge's dataset, so `parse_dax` recovers
/// the workflow exactly. Used to build bundled fixtures.
pub fn to_dax(workflow: &Workflow) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    let parents = workflow.parents();
    let children = workflow.children();
    writeln!(
        out,
        r#"<adag xmlns="http://pegasus.isi.edu/schema/DAX" version="3.4" name="{}" jobCount="{}" childCount="{}">"#,
        workflow.name,
        workflow.tasks.len(),
        parents.iter().filter(|p| !p.is_empty()).count(),
    )
    .unwrap();
    for t in &workflow.tasks {
        writeln!(
            out,
            r#"  <job id="{}" name="{}" runtime="{}">"#,
            t.id, t.id, t.reference_runtime
        )
        .unwrap();
        for &(p, ei) in &parents[t.index] {
            let e = &workflow.edges[ei];
            writeln!(
                out,
                r#"    <uses file="f_{}_{}" link="input" size="{}"/>"#,
                workflow.tasks[p].id, t.id, e.size_bytes
            )
            .unwrap();
        }
        for &(c, ei) in &children[t.index] {
            let e = &workflow.edges[ei];
            writeln!(
                out,
                r#"    <uses file="f_{}_{}" link="output" size="{}"/>"#,
                t.id, workflow.tasks[c].id, e.size_bytes
            )
            .unwrap();
        }
        writeln!(out, "  </job>").unwrap();
    }
    for (i, t) in workflow.tasks.iter().enumerate() {
        if parents[i].is_empty() {
            continue;
        }
        writeln!(out, r#"  <child ref="{}">"#, t.id).unwrap();
        for &(p, _) in &parents[i] {
            writeln!(out, r#"    <parent ref="{}"/>"#, workflow.tasks[p].id).unwrap();
        }
        writeln!(out, "  </child>").unwrap();
    }
    writeln!(out, "</adag>").unwrap();
    out
}

/// Parse the line-oriented fixture format used by tests:
/// `task <id> <runtime>` and `edge <from-id> <to-id> <bytes>`, one entry
/// per line, `#` comments allowed.
pub fn parse_fixture_text(text: &str) -> Result<Workflow, WorkflowError> {
    let mut tasks: Vec<Task> = Vec::new();
    let mut index_of: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || WorkflowError::MalformedDocument(format!("line {}: {line}", lineno + 1));
        match fields.as_slice() {
            ["task", id, runtime] => {
                let runtime: f64 = runtime.parse().map_err(|_| bad())?;
                let index = tasks.len();
                index_of.insert(id.to_string(), index);
                tasks.push(Task {
                    id: id.to_string(),
                    index,
                    reference_runtime: runtime,
                });
            }
            ["edge", from, to, bytes] => {
                let from = *index_of
                    .get(*from)
                    .ok_or_else(|| WorkflowError::UnknownJobReference(from.to_string()))?;
                let to = *index_of
                    .get(*to)
                    .ok_or_else(|| WorkflowError::UnknownJobReference(to.to_string()))?;
                let size_bytes: u64 = bytes.parse().map_err(|_| bad())?;
                edges.push(DataDependency {
                    from,
                    to,
                    size_bytes,
                });
            }
            _ => return Err(bad()),
        }
    }
    Ok(Workflow {
        name: "fixture".into(),
        tasks,
        edges,
    })
}

trait LocalName {
    fn has_tag_name_local(&self, name: &str) -> bool;
}

impl LocalName for roxmltree::Node<'_, '_> {
    fn has_tag_name_local(&self, name: &str) -> bool {
        self.is_element() && self.tag_name().name() == name
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO_JOB_DAX: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<adag xmlns="http://pegasus.isi.edu/schema/DAX" version="3.4" name="pair">
  <job id="A" name="gen" runtime="10">
    <uses file="raw" link="input" size="500"/>
    <uses file="f" link="output" size="1048576"/>
  </job>
  <job id="B" name="use" runtime="20">
    <uses file="f" link="input" size="1048576"/>
    <uses file="out" link="output" size="10"/>
  </job>
  <child ref="B">
    <parent ref="A"/>
  </child>
</adag>
"#;

    #[test]
    fn parses_two_job_document() {
        let w = parse_dax(TWO_JOB_DAX).unwrap();
        assert_eq!(w.name, "pair");
        assert_eq!(w.tasks.len(), 2);
        assert_eq!(w.tasks[0].id, "A");
        assert_eq!(w.tasks[0].reference_runtime, 10.0);
        assert_eq!(w.tasks[1].reference_runtime, 20.0);
        assert_eq!(
            w.edges,
            vec![DataDependency {
                from: 0,
                to: 1,
                size_bytes: 1_048_576
            }]
        );
    }

    #[test]
    fn document_without_children_has_no_edges() {
        let dax = r#"<adag name="solo"><job id="A" runtime="5"/></adag>"#;
        let w = parse_dax(dax).unwrap();
        assert_eq!(w.tasks.len(), 1);
        assert!(w.edges.is_empty());
    }

    #[test]
    fn unknown_child_reference_is_an_error() {
        let dax = r#"<adag name="bad">
  <job id="A" runtime="5"/>
  <child ref="MISSING"><parent ref="A"/></child>
</adag>"#;
        match parse_dax(dax) {
            Err(WorkflowError::UnknownJobReference(id)) => assert_eq!(id, "MISSING"),
            other => panic!("expected UnknownJobReference, got {other:?}"),
        }
    }

    #[test]
    fn negative_size_is_an_error() {
        let dax = r#"<adag name="bad">
  <job id="A" runtime="5"><uses file="f" link="output" size="-3"/></job>
</adag>"#;
        assert!(matches!(
            parse_dax(dax),
            Err(WorkflowError::NegativeSize { .. })
        ));
    }

    #[test]
    fn multi_file_edges_sum_sizes() {
        let dax = r#"<adag name="multi">
  <job id="A" runtime="5">
    <uses file="f1" link="output" size="100"/>
    <uses file="f2" link="output" size="250"/>
    <uses file="unrelated" link="output" size="999"/>
  </job>
  <job id="B" runtime="5">
    <uses file="f1" link="input" size="100"/>
    <uses file="f2" link="input" size="250"/>
    <uses file="external" link="input" size="777"/>
  </job>
  <child ref="B"><parent ref="A"/></child>
</adag>"#;
        let w = parse_dax(dax).unwrap();
        assert_eq!(w.edges[0].size_bytes, 350);
    }

    #[test]
    fn zero_size_edge_is_a_control_dependency() {
        let dax = r#"<adag name="ctl">
  <job id="A" runtime="5"/>
  <job id="B" runtime="5"/>
  <child ref="B"><parent ref="A"/></child>
</adag>"#;
        let w = parse_dax(dax).unwrap();
        assert_eq!(
            w.edges,
            vec![DataDependency {
                from: 0,
                to: 1,
                size_bytes: 0
            }]
        );
    }

    fn chain() -> Workflow {
        parse_fixture_text("task v1 1\ntask v2 2\ntask v3 3\nedge v1 v2 0\nedge v2 v3 0\n").unwrap()
    }

    #[test]
    fn validates_chain() {
        chain().validate().unwrap();
        assert_eq!(chain().topological_order().unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn detects_two_cycle() {
        let w = parse_fixture_text("task v1 1\ntask v2 1\nedge v1 v2 0\nedge v2 v1 0\n").unwrap();
        match w.validate() {
            Err(WorkflowError::CycleDetected(cycle)) => {
                assert!(cycle.contains(&0) && cycle.contains(&1));
            }
            other => panic!("expected CycleDetected, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_positive_runtime() {
        let w = parse_fixture_text("task v1 0\n").unwrap();
        assert!(matches!(
            w.validate(),
            Err(WorkflowError::NonPositiveRuntime { .. })
        ));
    }

    #[test]
    fn diamond_order_breaks_ties_by_index() {
        let w = parse_fixture_text(
            "task a 1\ntask b 1\ntask c 1\ntask d 1\nedge a b 0\nedge a c 0\nedge b d 0\nedge c d 0\n",
        )
        .unwrap();
        assert_eq!(w.topological_order().unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn empty_workflow_has_empty_order() {
        let w = Workflow {
            name: "empty".into(),
            tasks: vec![],
            edges: vec![],
        };
        assert_eq!(w.topological_order().unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn eight_task_nine_edge_example_is_valid() {
        let w = parse_fixture_text(
            "task v1 1\ntask v2 1\ntask v3 1\ntask v4 1\ntask v5 1\ntask v6 1\ntask v7 1\ntask v8 1\n\
             edge v1 v5 10\nedge v1 v8 10\nedge v1 v2 10\nedge v1 v3 10\nedge v1 v6 10\n\
             edge v5 v7 10\nedge v2 v4 10\nedge v3 v4 10\nedge v6 v7 10\n",
        )
        .unwrap();
        assert_eq!(w.tasks.len(), 8);
        assert_eq!(w.edges.len(), 9);
        w.validate().unwrap();
    }

    #[test]
    fn dax_round_trip_preserves_structure() {
        let w = chain();
        let again = parse_dax(&to_dax(&w)).unwrap();
        assert_eq!(again.tasks.len(), w.tasks.len());
        for (a, b) in again.tasks.iter().zip(&w.tasks) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.reference_runtime, b.reference_runtime);
        }
        assert_eq!(again.edges, w.edges);
    }

    /// Random DAG: edges only from lower to higher indices.
    fn arb_dag() -> impl Strategy<Value = Workflow> {
        (2usize..10).prop_flat_map(|n| {
            let edges = proptest::collection::vec((0usize..n, 0usize..n, 0u64..1000), 0..20);
            edges.prop_map(move |raw| {
                let tasks = (0..n)
                    .map(|i| Task {
                        id: format!("t{i}"),
                        index: i,
                        reference_runtime: 1.0,
                    })
                    .collect();
                let mut seen = std::collections::HashSet::new();
                let edges = raw
                    .into_iter()
                    .filter_map(|(a, b, s)| {
                        let (from, to) = (a.min(b), a.max(b));
                        if from == to || !seen.insert((from, to)) {
                            return None;
                        }
                        Some(DataDependency {
                            from,
                            to,
                            size_bytes: s,
                        })
                    })
                    .collect();
                Workflow {
                    name: "rand".into(),
                    tasks,
                    edges,
                }
            })
        })
    }

    proptest! {
        #[test]
        fn topological_order_is_a_valid_permutation(w in arb_dag()) {
            let order = w.topological_order().unwrap();
            let mut sorted = order.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..w.tasks.len()).collect::<Vec<_>>());
            let pos: Vec<usize> = {
                let mut p = vec![0; order.len()];
                for (i, &t) in order.iter().enumerate() { p[t] = i; }
                p
            };
            for e in &w.edges {
                prop_assert!(pos[e.from] < pos[e.to]);
            }
        }

        #[test]
        fn dax_round_trip_random(w in arb_dag()) {
            let again = parse_dax(&to_dax(&w)).unwrap();
            prop_assert_eq!(again.tasks.len(), w.tasks.len());
            // Edges are a set; the DAX layout groups them by child.
            let key = |e: &DataDependency| (e.from, e.to, e.size_bytes);
            let mut a: Vec<_> = again.edges.iter().map(key).collect();
            let mut b: Vec<_> = w.edges.iter().map(key).collect();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }
}
