#pragma once

#include "prep/common.hpp"
#include "prep/graph.hpp"
#include "prep/metrics.hpp"
#include "prep/score_table.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prep {

/// One evaluation unit: a candidate pair set with binary relevance labels
/// (an ego network, an author name, a synthetic group).
struct SubTask {
    std::string id;
    std::vector<std::pair<std::string, std::string>> candidates;
    std::vector<int> labels; // aligned with candidates

    int relevant_count() const {
        int n = 0;
        for (int l : labels)
            n += l ? 1 : 0;
        return n;
    }
    int total_count() const { return static_cast<int>(candidates.size()); }
};

/// Reads `u<TAB>v<TAB>{0|1}` with an optional fourth sub-task column;
/// three-column files form a single sub-task named "all".
inline std::vector<SubTask> read_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("label file '" + path + "' cannot be opened");
    std::vector<SubTask> tasks;
    std::map<std::string, size_t> task_index;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string l{strip_cr(line)};
        if (l.empty() || l[0] == '#')
            continue;
        std::vector<std::string> f = split(l, '\t');
        const std::string ctx = path + ":" + std::to_string(lineno);
        if (f.size() != 3 && f.size() != 4)
            throw ParseError(ctx + ": expected u<TAB>v<TAB>{0|1}[<TAB>subtask]");
        if (f[2] != "0" && f[2] != "1")
            throw ParseError(ctx + ": label must be 0 or 1");
        const std::string task_id = f.size() == 4 ? f[3] : "all";
        auto [it, fresh] = task_index.try_emplace(task_id, tasks.size());
        if (fresh)
            tasks.push_back({task_id, {}, {}});
        SubTask& t = tasks[it->second];
        t.candidates.emplace_back(f[0], f[1]);
        t.labels.push_back(f[2] == "1" ? 1 : 0);
    }
    if (tasks.empty())
        throw ValidationError(path + ": no labeled pairs");
    return tasks;
}

// ---------------------------------------------------------------------------
// Entity-resolution sub-task construction. Input: `mention_id<TAB>entity_id`
// where the entity id's prefix before the last '#' is the author name (an id
// without '#' is its own name). Mentions are merged into entity nodes, the
// largest entity per name is split in two (even split, file order), and the
// split pair is the one relevant pair among all same-name node pairs.

struct EntityResolutionBuild {
    HinGraph graph; // mention nodes replaced by entity / split-half nodes
    std::vector<SubTask> tasks;
    WarningList warnings;
};

inline std::vector<std::pair<std::string, std::string>>
read_mention_entity_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("mention-entity file '" + path + "' cannot be opened");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string l{strip_cr(line)};
        if (l.empty() || l[0] == '#')
            continue;
        std::vector<std::string> f = split(l, '\t');
        if (f.size() != 2 || f[0].empty() || f[1].empty())
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected mention_id<TAB>entity_id");
        out.emplace_back(f[0], f[1]);
    }
    return out;
}

inline std::string entity_name(const std::string& entity_id) {
    const size_t pos = entity_id.rfind('#');
    return pos == std::string::npos ? entity_id : entity_id.substr(0, pos);
}

inline EntityResolutionBuild build_entity_resolution_tasks(
    const HinGraph& g, const std::vector<std::pair<std::string, std::string>>& mention_entity) {
    if (mention_entity.empty())
        throw ValidationError("entity-resolution build: no mention labels");

    struct Entity {
        std::string id;
        std::vector<int> mentions; // graph node indices, file order
        int node_type = -1;
    };
    std::vector<Entity> entities;
    std::map<std::string, size_t> entity_index;
    std::vector<std::string> mention_new_id(static_cast<size_t>(g.num_nodes()));

    std::vector<char> mention_seen(static_cast<size_t>(g.num_nodes()), 0);
    for (const auto& [mention, entity] : mention_entity) {
        auto node = g.node_index.find(mention);
        if (node == g.node_index.end())
            throw ValidationError("entity-resolution build: mention '" + mention +
                                  "' is not a graph node");
        if (mention_seen[static_cast<size_t>(node->second)]++)
            throw ValidationError("entity-resolution build: mention '" + mention +
                                  "' is labeled more than once");
        auto [it, fresh] = entity_index.try_emplace(entity, entities.size());
        if (fresh)
            entities.push_back({entity, {}, g.node_type_of(node->second)});
        Entity& e = entities[it->second];
        if (e.node_type != g.node_type_of(node->second))
            throw ValidationError("entity-resolution build: entity '" + entity +
                                  "' mixes mention node types");
        e.mentions.push_back(node->second);
    }

    // Names in first-appearance order; entities listed per name.
    std::vector<std::string> names;
    std::map<std::string, std::vector<size_t>> by_name;
    for (size_t i = 0; i < entities.size(); ++i) {
        const std::string nm = entity_name(entities[i].id);
        auto [it, fresh] = by_name.try_emplace(nm);
        if (fresh)
            names.push_back(nm);
        it->second.push_back(i);
    }

    EntityResolutionBuild out;
    struct NewNode {
        std::string id;
        int type;
    };
    std::vector<NewNode> new_nodes;
    auto assign = [&](int mention_node, const std::string& new_id) {
        mention_new_id[static_cast<size_t>(mention_node)] = new_id;
    };

    for (const std::string& nm : names) {
        const std::vector<size_t>& eids = by_name.at(nm);
        // Largest entity by mention count; lowest entity id wins ties.
        size_t best = eids[0];
        for (size_t e : eids) {
            const size_t n = entities[e].mentions.size();
            const size_t bn = entities[best].mentions.size();
            if (n > bn || (n == bn && entities[e].id < entities[best].id))
                best = e;
        }
        const bool splittable = entities[best].mentions.size() >= 2;
        if (!splittable)
            out.warnings.push_back("entity-resolution: name '" + nm +
                                   "' has no entity with >= 2 mentions; sub-task skipped");

        SubTask task;
        task.id = nm;
        std::vector<std::string> name_nodes;
        for (size_t e : eids) {
            const Entity& ent = entities[e];
            if (splittable && e == best) {
                const std::string a = ent.id + "~0", b = ent.id + "~1";
                const size_t half = (ent.mentions.size() + 1) / 2;
                for (size_t i = 0; i < ent.mentions.size(); ++i)
                    assign(ent.mentions[i], i < half ? a : b);
                new_nodes.push_back({a, ent.node_type});
                new_nodes.push_back({b, ent.node_type});
                name_nodes.push_back(a);
                name_nodes.push_back(b);
            } else {
                for (int m : ent.mentions)
                    assign(m, ent.id);
                new_nodes.push_back({ent.id, ent.node_type});
                name_nodes.push_back(ent.id);
            }
        }
        if (!splittable)
            continue;
        const std::string rel_a = entities[best].id + "~0";
        const std::string rel_b = entities[best].id + "~1";
        for (size_t i = 0; i < name_nodes.size(); ++i)
            for (size_t j = i + 1; j < name_nodes.size(); ++j) {
                task.candidates.emplace_back(name_nodes[i], name_nodes[j]);
                const bool relevant = (name_nodes[i] == rel_a && name_nodes[j] == rel_b) ||
                                      (name_nodes[i] == rel_b && name_nodes[j] == rel_a);
                task.labels.push_back(relevant ? 1 : 0);
            }
        out.tasks.push_back(std::move(task));
    }

    // Rebuild the graph: untouched nodes keep their ids, mentions map to
    // their entity/half node.
    HinGraph& ng = out.graph;
    for (int z = 0; z < g.num_nodes(); ++z)
        if (mention_new_id[static_cast<size_t>(z)].empty())
            ng.add_node(g.node_ids[static_cast<size_t>(z)],
                        g.node_type_names[static_cast<size_t>(g.node_type_of(z))]);
    for (const NewNode& nn : new_nodes) {
        if (ng.node_index.contains(nn.id))
            throw ValidationError("entity-resolution build: new node id '" + nn.id +
                                  "' collides with an existing node");
        ng.add_node(nn.id, g.node_type_names[static_cast<size_t>(nn.type)]);
    }
    auto remap = [&](int z) -> const std::string& {
        const std::string& moved = mention_new_id[static_cast<size_t>(z)];
        return moved.empty() ? g.node_ids[static_cast<size_t>(z)] : moved;
    };
    for (const HinGraph::Edge& e : g.edges)
        ng.add_edge(remap(e.src), remap(e.dst),
                    g.edge_type_names[static_cast<size_t>(e.type)]);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation proper.

struct SubTaskMetrics {
    std::string id;
    int relevant = 0;
    int total = 0;
    std::optional<double> roc_auc;
    std::optional<double> auprc;
    std::optional<double> reciprocal_rank;
};

struct EvalReport {
    std::string measure_id;
    std::string direction;
    std::string config_fingerprint;
    std::map<std::string, std::string> metadata; // seed, variant, ...
    std::vector<SubTaskMetrics> rows;
    // metric -> scheme -> aggregate
    std::map<std::string, std::map<std::string, double>> aggregates;
    WarningList warnings;
};

/// Metrics of one sub-task against one (direction-normalized) score table.
/// Single-class sub-tasks skip the AUC metrics with a warning; reciprocal
/// rank applies when the sub-task has exactly one relevant pair. Candidates
/// missing from the table rank last (tied).
inline SubTaskMetrics evaluate_subtask(const ScoreTable& st, const SubTask& task,
                                       WarningList& warnings) {
    SubTaskMetrics row;
    row.id = task.id;
    row.relevant = task.relevant_count();
    row.total = task.total_count();

    std::vector<double> oriented;
    oriented.reserve(task.candidates.size());
    for (const auto& [u, v] : task.candidates)
        oriented.push_back(st.oriented_score(u, v));

    const bool two_class = row.relevant >= 1 && row.relevant < row.total;
    if (two_class) {
        row.roc_auc = roc_auc(oriented, task.labels);
        row.auprc = auprc(oriented, task.labels);
    } else {
        warnings.push_back("sub-task '" + task.id +
                           "' is single-class; excluded from AUC averaging");
        if (row.relevant == row.total && row.relevant >= 1)
            row.auprc = auprc(oriented, task.labels); // all-positive: defined
    }
    if (row.relevant == 1)
        row.reciprocal_rank = reciprocal_rank(oriented, task.labels);
    return row;
}

/// The three averaging schemes over whichever sub-tasks produced each metric.
inline std::map<std::string, std::map<std::string, double>>
aggregate_rows(const std::vector<SubTaskMetrics>& rows) {
    struct Metric {
        std::vector<double> values, rel, tot;
    };
    std::map<std::string, Metric> agg;
    for (const SubTaskMetrics& row : rows) {
        auto push = [&](const char* name, const std::optional<double>& v) {
            if (!v)
                return;
            Metric& m = agg[name];
            m.values.push_back(*v);
            m.rel.push_back(row.relevant);
            m.tot.push_back(row.total);
        };
        push("roc_auc", row.roc_auc);
        push("auprc", row.auprc);
        push("mrr", row.reciprocal_rank);
    }
    std::map<std::string, std::map<std::string, double>> out;
    for (const auto& [name, m] : agg)
        for (AverageScheme scheme : {AverageScheme::Uniform, AverageScheme::ByRelevant,
                                     AverageScheme::ByTotal})
            out[name][scheme_name(scheme)] = aggregate(m.values, m.rel, m.tot, scheme);
    return out;
}

/// Scores every sub-task against one score table and averages. Sub-tasks are
/// independent and evaluated in parallel; rows and warnings are merged in
/// task order afterwards.
inline EvalReport evaluate(const ScoreTable& st, const std::vector<SubTask>& tasks,
                           const std::string& config_fingerprint = "") {
    if (tasks.empty())
        throw ValidationError("evaluate: no sub-tasks");
    EvalReport rep;
    rep.measure_id = st.measure_id;
    rep.direction = direction_name(st.direction);
    rep.config_fingerprint = config_fingerprint;
    rep.warnings = st.warnings;
    st.ensure_index();

    const int n = static_cast<int>(tasks.size());
    rep.rows.resize(static_cast<size_t>(n));
    std::vector<WarningList> task_warnings(static_cast<size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < n; ++i)
        rep.rows[static_cast<size_t>(i)] = evaluate_subtask(
            st, tasks[static_cast<size_t>(i)], task_warnings[static_cast<size_t>(i)]);
    for (const WarningList& w : task_warnings)
        rep.warnings.insert(rep.warnings.end(), w.begin(), w.end());
    rep.aggregates = aggregate_rows(rep.rows);
    return rep;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& rep,
                                             const std::vector<std::string>& input_hashes = {}) {
    nlohmann::ordered_json j;
    j["tool_version"] = std::string(kToolVersion);
    j["measure"] = rep.measure_id;
    j["direction"] = rep.direction;
    j["config_fingerprint"] = rep.config_fingerprint;
    for (const auto& [k, v] : rep.metadata)
        j[k] = v;
    if (!input_hashes.empty())
        j["input_hashes"] = input_hashes;
    j["subtasks"] = nlohmann::ordered_json::array();
    for (const SubTaskMetrics& r : rep.rows) {
        nlohmann::ordered_json row;
        row["id"] = r.id;
        row["relevant"] = r.relevant;
        row["total"] = r.total;
        if (r.roc_auc)
            row["roc_auc"] = *r.roc_auc;
        if (r.auprc)
            row["auprc"] = *r.auprc;
        if (r.reciprocal_rank)
            row["reciprocal_rank"] = *r.reciprocal_rank;
        j["subtasks"].push_back(std::move(row));
    }
    j["aggregates"] = rep.aggregates;
    j["warnings"] = rep.warnings;
    return j;
}

} // namespace prep
