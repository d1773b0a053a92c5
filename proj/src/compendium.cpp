#include "bellcanon/compendium.hpp"

#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fcntl.h>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bellcanon/digest.hpp"

namespace bellcanon {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Interchange documents

long long cg_dimension(const Scenario &s) {
    long long d = 1;
    for (int i = 0; i < s.party_count(); ++i) {
        long long slots = 1;
        for (int j = 0; j < s.setting_count(i); ++j)
            slots += s.outcome_count(i, j) - 1;
        d *= slots;
    }
    return d;
}

BellExpression cg_to_full(const Scenario &s, const std::vector<Rat> &cg) {
    if ((long long)cg.size() != cg_dimension(s))
        throw UserError("coefficient count does not match the Collins-Gisin size");
    int n = s.party_count();
    // per party: the (outcome, setting) pair of each CG slot, slot 0 omitted
    std::vector<std::vector<std::pair<int, int>>> slot_pairs(n);
    std::vector<long long> slots(n);
    for (int i = 0; i < n; ++i) {
        slot_pairs[i].push_back({0, 0}); // slot 0: marginalized
        for (int x = 1; x <= s.setting_count(i); ++x)
            for (int a = 1; a <= s.outcome_count(i, x - 1) - 1; ++a)
                slot_pairs[i].push_back({a, x});
        slots[i] = (long long)slot_pairs[i].size();
    }
    BellExpression out = BellExpression::zero(s);
    for (long long idx = 0; idx < (long long)cg.size(); ++idx) {
        if (cg[idx] == 0)
            continue;
        long long rem = idx;
        std::vector<std::pair<int, int>> pick(n);
        for (int i = 0; i < n; ++i) {
            pick[i] = slot_pairs[i][rem % slots[i]];
            rem /= slots[i];
        }
        // expand marginalized parties over all outcomes of their first setting
        std::vector<int> free_outcome(n, 1);
        for (;;) {
            IndexTuple t;
            t.parts.resize(n);
            for (int i = 0; i < n; ++i)
                t.parts[i] = pick[i].first == 0
                                 ? IndexTuple::PartyIndex{free_outcome[i], 1}
                                 : IndexTuple::PartyIndex{pick[i].first, pick[i].second};
            out.at(t) += cg[idx];
            int i = 0;
            while (i < n) {
                if (pick[i].first != 0) {
                    ++i;
                    continue;
                }
                if (++free_outcome[i] <= s.outcome_count(i, 0))
                    break;
                free_outcome[i] = 1;
                ++i;
            }
            if (i == n)
                break;
        }
    }
    return out;
}

std::vector<Rat> cg_reorder(const Scenario &s, const std::vector<Rat> &cg,
                            const ReorderMap &map) {
    if ((long long)cg.size() != cg_dimension(s))
        throw UserError("coefficient count does not match the Collins-Gisin size");
    Scenario out_scenario = map.apply(s);
    int n = s.party_count();
    // slot tables of both scenarios
    auto slot_table = [](const Scenario &sc, int party) {
        std::vector<std::pair<int, int>> slots{{0, 0}};
        for (int x = 1; x <= sc.setting_count(party); ++x)
            for (int a = 1; a <= sc.outcome_count(party, x - 1) - 1; ++a)
                slots.push_back({a, x});
        return slots;
    };
    std::vector<std::vector<std::pair<int, int>>> in_slots(n), out_slots(n);
    std::vector<long long> in_dims(n), out_dims(n);
    for (int i = 0; i < n; ++i) {
        in_slots[i] = slot_table(s, i);
        in_dims[i] = (long long)in_slots[i].size();
        out_slots[i] = slot_table(out_scenario, i);
        out_dims[i] = (long long)out_slots[i].size();
    }
    std::vector<Rat> out(cg.size());
    for (long long idx = 0; idx < (long long)cg.size(); ++idx) {
        long long rem = idx, out_idx = 0, stride = 1;
        for (int i = 0; i < n; ++i) {
            auto [a, x] = in_slots[i][rem % in_dims[i]];
            rem /= in_dims[i];
            int p = map.party_to[i];
            int slot = 0;
            if (x != 0) {
                int nx = map.setting_to[i][x - 1] + 1;
                auto &table = out_slots[p];
                slot = (int)(std::find(table.begin(), table.end(),
                                       std::make_pair(a, nx)) -
                             table.begin());
            }
            // accumulate party p's slot with the output strides
            long long pstride = 1;
            for (int q = 0; q < p; ++q)
                pstride *= out_dims[q];
            out_idx += slot * pstride;
            (void)stride;
        }
        out[out_idx] += cg[idx];
    }
    return out;
}

OrientedExpression InterchangeDocument::to_expression() const {
    OrientedExpression out;
    if (notation == Notation::Probabilities) {
        if ((long long)coefficients.size() != scenario.full_dimension())
            throw UserError("coefficient count " + std::to_string(coefficients.size()) +
                            " does not match the scenario dimension " +
                            std::to_string(scenario.full_dimension()));
        out.expr = BellExpression(scenario, coefficients);
    } else {
        out.expr = cg_to_full(scenario, coefficients);
    }
    for (const auto &[name, value] : bounds)
        out.bounds[name] = BoundValue{value, bound_set_conditional(name)};
    return out;
}

InterchangeDocument InterchangeDocument::from_expression(const OrientedExpression &e) {
    InterchangeDocument doc;
    doc.scenario = e.expr.scenario;
    doc.notation = Notation::Probabilities;
    doc.coefficients = e.expr.coeff;
    for (const auto &[name, bound] : e.bounds)
        doc.bounds[name] = bound.value;
    return doc;
}

namespace {

// A bracketed scenario like [(3 2) (2 2 2)] reads as a flow sequence unless
// quoted; rebuild the original text in that case.
Scenario scenario_from_node(const TextNode &n) {
    if (n.kind == TextNode::Kind::Scalar)
        return Scenario::parse(n.scalar);
    if (n.kind == TextNode::Kind::Sequence) {
        std::string text = "[";
        for (size_t i = 0; i < n.items.size(); ++i) {
            if (n.items[i].kind != TextNode::Kind::Scalar)
                throw UserError("malformed scenario");
            if (i)
                text += ",";
            text += n.items[i].scalar;
        }
        return Scenario::parse(text + "]");
    }
    throw UserError("malformed scenario");
}

std::vector<std::string> scalar_list(const TextNode &n, const std::string &what) {
    if (n.kind != TextNode::Kind::Sequence)
        throw UserError(what + " must be a sequence");
    std::vector<std::string> out;
    for (const auto &item : n.items) {
        if (item.kind != TextNode::Kind::Scalar)
            throw UserError(what + " must be a sequence of scalars");
        out.push_back(item.scalar);
    }
    return out;
}

} // namespace

InterchangeDocument parse_interchange(const std::string &text) {
    TextNode root = parse_document(text);
    if (root.kind != TextNode::Kind::Mapping)
        throw UserError("the document must be a mapping");
    InterchangeDocument doc;
    doc.scenario = scenario_from_node(root.at("scenario"));
    if (const TextNode *n = root.find("notation")) {
        if (n->scalar == "probabilities")
            doc.notation = Notation::Probabilities;
        else if (n->scalar == "collins-gisin")
            doc.notation = Notation::CollinsGisin;
        else
            throw UserError("unknown notation '" + n->scalar + "'");
    }
    const TextNode &coeff = root.at("coefficients");
    if (coeff.kind != TextNode::Kind::Sequence)
        throw UserError("coefficients must be a sequence");
    for (const auto &item : coeff.items)
        doc.coefficients.push_back(parse_rat(item.scalar));
    long long expected = doc.notation == Notation::Probabilities
                             ? doc.scenario.full_dimension()
                             : cg_dimension(doc.scenario);
    if ((long long)doc.coefficients.size() != expected)
        throw UserError("coefficient length mismatch: got " +
                        std::to_string(doc.coefficients.size()) + ", scenario " +
                        doc.scenario.to_text() + " needs " + std::to_string(expected));
    if (const TextNode *n = root.find("bounds")) {
        if (n->kind != TextNode::Kind::Mapping)
            throw UserError("bounds must be a mapping");
        for (const auto &[name, value] : n->entries)
            doc.bounds[name] = parse_rat(value.scalar);
    }
    if (const TextNode *n = root.find("metadata")) {
        if (n->kind != TextNode::Kind::Mapping)
            throw UserError("metadata must be a mapping");
        if (const TextNode *m = n->find("names"))
            doc.names = scalar_list(*m, "names");
        if (const TextNode *m = n->find("references"))
            doc.references = scalar_list(*m, "references");
        if (const TextNode *m = n->find("notes"))
            doc.notes = m->scalar;
    }
    return doc;
}

std::string serialize_interchange(const InterchangeDocument &doc) {
    TextNode root = TextNode::make_mapping();
    root.set("scenario", TextNode::make_scalar(doc.scenario.to_text()));
    root.set("notation",
             TextNode::make_scalar(doc.notation == Notation::Probabilities
                                       ? "probabilities"
                                       : "collins-gisin"));
    std::vector<TextNode> coeff;
    for (const Rat &c : doc.coefficients)
        coeff.push_back(TextNode::make_scalar(to_string(c)));
    root.set("coefficients", TextNode::make_sequence(std::move(coeff)));
    if (!doc.bounds.empty()) {
        TextNode bounds = TextNode::make_mapping();
        for (const auto &[name, value] : doc.bounds)
            bounds.set(name, TextNode::make_scalar(to_string(value)));
        root.set("bounds", std::move(bounds));
    }
    if (!doc.names.empty() || !doc.references.empty() || !doc.notes.empty()) {
        TextNode meta = TextNode::make_mapping();
        if (!doc.names.empty()) {
            std::vector<TextNode> names;
            for (const auto &n : doc.names)
                names.push_back(TextNode::make_scalar(n));
            meta.set("names", TextNode::make_sequence(std::move(names)));
        }
        if (!doc.references.empty()) {
            std::vector<TextNode> refs;
            for (const auto &r : doc.references)
                refs.push_back(TextNode::make_scalar(r));
            meta.set("references", TextNode::make_sequence(std::move(refs)));
        }
        if (!doc.notes.empty())
            meta.set("notes", TextNode::make_scalar(doc.notes));
        root.set("metadata", std::move(meta));
    }
    return write_document(root);
}

// ---------------------------------------------------------------------------
// Records

std::string canonical_key(const BellExpression &canonical) {
    std::string material;
    auto field = [&material](const std::string &s) {
        material += std::to_string(s.size());
        material += ':';
        material += s;
        material += ';';
    };
    field("bellcanon-key-v1");
    field(canonical.scenario.to_text());
    field(std::to_string(canonical.coeff.size()));
    for (const Rat &c : canonical.coeff) {
        if (!is_integer(c))
            throw UserError("canonical keys require integer coefficients");
        field(to_string(c));
    }
    return sha256_hex(material);
}

bool is_canonical_form(const BellExpression &e) {
    DecompositionTree tree;
    try {
        tree = decompose(OrientedExpression{e, {}});
    } catch (const TrivialExpressionError &) {
        return false;
    }
    if (!tree.is_leaf())
        return false;
    const Leaf &leaf = tree.leaf();
    return leaf.canonical.expr == e && leaf.witness.is_identity() &&
           leaf.orbit_rank == 1 && leaf.scale == 1 && leaf.shift == 0 &&
           leaf.structure.empty() && leaf.sign == 1;
}

Record make_record(const OrientedExpression &canonical) {
    Record r;
    r.expr = canonical;
    r.key = canonical_key(canonical.expr);
    return r;
}

Record parse_record(const std::string &text) {
    TextNode root = parse_document(text);
    Record r;
    r.key = root.at("key").scalar;
    InterchangeDocument doc = parse_interchange(text);
    r.expr = doc.to_expression();
    r.names = doc.names;
    r.references = doc.references;
    r.notes = doc.notes;
    if (const TextNode *n = root.find("bound-provenance")) {
        if (n->kind != TextNode::Kind::Mapping)
            throw UserError("bound-provenance must be a mapping");
        for (const auto &[name, value] : n->entries)
            r.bound_provenance[name] = value.scalar;
    }
    std::string expected = canonical_key(r.expr.expr);
    if (r.key != expected)
        throw UserError("record key " + r.key + " does not match its content key " +
                        expected);
    return r;
}

std::string serialize_record(const Record &r) {
    InterchangeDocument doc = InterchangeDocument::from_expression(r.expr);
    doc.names = r.names;
    doc.references = r.references;
    doc.notes = r.notes;
    std::string body = serialize_interchange(doc);
    TextNode root = parse_document(body);
    TextNode out = TextNode::make_mapping();
    out.set("key", TextNode::make_scalar(r.key));
    for (auto &[k, v] : root.entries)
        out.set(k, std::move(v));
    if (!r.bound_provenance.empty()) {
        TextNode prov = TextNode::make_mapping();
        for (const auto &[name, text] : r.bound_provenance)
            prov.set(name, TextNode::make_scalar(text));
        out.set("bound-provenance", std::move(prov));
    }
    return write_document(out);
}

// ---------------------------------------------------------------------------
// Store

namespace {

constexpr const char *kManifest = "manifest.yaml";

struct FileLock {
    int fd = -1;
    explicit FileLock(const fs::path &p) {
        fd = ::open(p.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd < 0 || ::flock(fd, LOCK_EX) != 0)
            throw UserError("cannot lock the store at " + p.string());
    }
    ~FileLock() {
        if (fd >= 0) {
            ::flock(fd, LOCK_UN);
            ::close(fd);
        }
    }
};

std::string read_file(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw UserError("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file_atomic(const fs::path &p, const std::string &content) {
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw UserError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, p);
}

} // namespace

Store Store::create(const fs::path &dir) {
    fs::create_directories(dir / "objects");
    TextNode manifest = TextNode::make_mapping();
    manifest.set("format", TextNode::make_scalar("bellcanon-store"));
    manifest.set("version", TextNode::make_scalar("1"));
    manifest.set("digest", TextNode::make_scalar("sha256"));
    manifest.set("serialization", TextNode::make_scalar("bellcanon-key-v1"));
    write_file_atomic(dir / kManifest, write_document(manifest));
    Store s(dir);
    s.rebuild_index();
    return s;
}

Store Store::open(const fs::path &dir) {
    if (!fs::exists(dir / kManifest))
        throw UserError("no store at " + dir.string() +
                        " (expected " + (dir / kManifest).string() + ")");
    TextNode manifest = parse_document(read_file(dir / kManifest));
    if (manifest.at("digest").scalar != "sha256")
        throw UserError("unsupported digest algorithm in the store manifest");
    return Store(dir);
}

fs::path Store::object_path(const std::string &key) const {
    if (key.size() < 3)
        throw UserError("malformed key '" + key + "'");
    return dir_ / "objects" / key.substr(0, 2) / (key + ".yaml");
}

void Store::store(const Record &r, bool merge) {
    if (r.key != canonical_key(r.expr.expr))
        throw UserError("record key does not match its content");
    if (!is_canonical_form(r.expr.expr))
        throw UserError("only canonical expressions can be stored");
    FileLock lock(dir_ / ".lock");
    Record final = r;
    fs::path path = object_path(r.key);
    if (fs::exists(path)) {
        Record existing = parse_record(read_file(path));
        bool same = existing.expr.bounds == r.expr.bounds &&
                    existing.names == r.names &&
                    existing.references == r.references &&
                    existing.notes == r.notes &&
                    existing.bound_provenance == r.bound_provenance;
        if (!same && !merge)
            throw UserError("key " + r.key +
                            " already stored with different content; pass the "
                            "merge flag to combine them");
        if (!same) {
            for (const auto &[name, bound] : existing.expr.bounds) {
                auto it = final.expr.bounds.find(name);
                if (it == final.expr.bounds.end())
                    final.expr.bounds[name] = bound;
                else if (!(it->second == bound))
                    throw UserError("conflicting '" + name + "' bounds for " + r.key);
            }
            for (const auto &n : existing.names)
                if (std::find(final.names.begin(), final.names.end(), n) ==
                    final.names.end())
                    final.names.push_back(n);
            for (const auto &n : existing.references)
                if (std::find(final.references.begin(), final.references.end(), n) ==
                    final.references.end())
                    final.references.push_back(n);
            for (const auto &[name, text] : existing.bound_provenance)
                final.bound_provenance.emplace(name, text);
            if (final.notes.empty())
                final.notes = existing.notes;
        }
    }
    fs::create_directories(path.parent_path());
    write_file_atomic(path, serialize_record(final));
    rebuild_index();
}

std::optional<Record> Store::lookup(const std::string &key) const {
    fs::path path = object_path(key);
    if (!fs::exists(path))
        return std::nullopt;
    return parse_record(read_file(path));
}

std::optional<Record> Store::find_by_expression(const OrientedExpression &e) const {
    DecompositionTree tree;
    try {
        tree = decompose(e, {.compute_ranks = false});
    } catch (const TrivialExpressionError &) {
        return std::nullopt;
    }
    if (!tree.is_leaf())
        return std::nullopt; // composite; use match
    return lookup(canonical_key(tree.leaf().canonical.expr));
}

std::vector<std::string> Store::keys() const {
    std::vector<std::string> out;
    fs::path objects = dir_ / "objects";
    if (!fs::exists(objects))
        return out;
    for (const auto &sub : fs::directory_iterator(objects))
        if (sub.is_directory())
            for (const auto &file : fs::directory_iterator(sub.path()))
                if (file.path().extension() == ".yaml")
                    out.push_back(file.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

void Store::rebuild_index() const {
    std::ostringstream os;
    for (const std::string &key : keys()) {
        Record r = parse_record(read_file(object_path(key)));
        os << key << '\t' << r.expr.expr.scenario.to_text() << '\t';
        for (size_t i = 0; i < r.names.size(); ++i) {
            if (i)
                os << ',';
            os << r.names[i];
        }
        os << '\n';
    }
    write_file_atomic(dir_ / "index.tsv", os.str());
}

// ---------------------------------------------------------------------------
// Matching and rendering

MatchReport match(const OrientedExpression &e, const Store &db,
                  const DecomposeOptions &opts) {
    MatchReport report;
    report.tree = decompose(e, opts);
    for (const Leaf *leaf : report.tree.leaves())
        report.records.push_back(db.lookup(canonical_key(leaf->canonical.expr)));
    return report;
}

namespace {

std::string coeff_list(const BellExpression &e) {
    std::string out = "[";
    for (size_t i = 0; i < e.coeff.size(); ++i) {
        if (i)
            out += ", ";
        out += to_string(e.coeff[i]);
    }
    return out + "]";
}

std::string structure_summary(const StructureReport &report) {
    std::ostringstream os;
    bool first = true;
    for (const auto &step : report.steps) {
        if (!first)
            os << ", ";
        first = false;
        if (const auto *rp = std::get_if<RemovedParty>(&step))
            os << "removed party " << rp->party + 1;
        else if (const auto *rs = std::get_if<RemovedSetting>(&step))
            os << "removed setting " << rs->setting + 1 << " of party " << rs->party + 1;
        else if (const auto *mo = std::get_if<MergedOutcomes>(&step))
            os << "merged outcome " << mo->removed << " into " << mo->kept
               << " (setting " << mo->setting + 1 << " of party " << mo->party + 1 << ")";
        else if (std::get_if<ReorderStep>(&step))
            os << "reordered the scenario";
        else if (const auto *sh = std::get_if<ShiftStep>(&step))
            os << "shed constant " << to_string(sh->value);
    }
    return os.str();
}

void tree_text(std::ostringstream &os, const DecompositionTree &tree,
               const std::vector<std::optional<Record>> *records, size_t &leaf_index,
               int depth) {
    std::string pad(2 * depth, ' ');
    if (tree.is_leaf()) {
        const Leaf &leaf = tree.leaf();
        os << pad << "leaf: scenario " << leaf.canonical.expr.scenario.to_text() << "\n";
        os << pad << "  canonical: " << coeff_list(leaf.canonical.expr) << "\n";
        for (const auto &[name, bound] : leaf.canonical.bounds)
            os << pad << "  bound " << name << ": " << to_string(bound.value) << "\n";
        os << pad << "  sign: " << (leaf.sign > 0 ? "+1" : "-1")
           << "  scale: " << to_string(leaf.scale)
           << "  shift: " << to_string(leaf.shift) << "\n";
        if (!leaf.structure.steps.empty())
            os << pad << "  removed: " << structure_summary(leaf.structure) << "\n";
        os << pad << "  witness: " << cycle_string(leaf.witness) << "\n";
        if (leaf.orbit_rank != 0)
            os << pad << "  orbit rank: " << to_string(leaf.orbit_rank) << "\n";
        if (records) {
            const auto &rec = (*records)[leaf_index];
            if (rec) {
                os << pad << "  record: " << rec->key.substr(0, 16);
                if (!rec->names.empty())
                    os << " (" << rec->names.front() << ")";
                os << "\n";
            } else {
                os << pad << "  record: not in the compendium\n";
            }
        }
        ++leaf_index;
        return;
    }
    const Product &p = tree.product();
    os << pad << "product: kappa " << to_string(p.kappa) << "\n";
    if (!p.structure.steps.empty())
        os << pad << "  removed: " << structure_summary(p.structure) << "\n";
    if (p.shift != 0)
        os << pad << "  shift: " << to_string(p.shift) << "\n";
    for (size_t c = 0; c < p.children.size(); ++c) {
        os << pad << "  factor on parties {";
        for (size_t i = 0; i < p.child_parties[c].size(); ++i) {
            if (i)
                os << ", ";
            os << p.child_parties[c][i] + 1;
        }
        os << "}:\n";
        tree_text(os, p.children[c], records, leaf_index, depth + 2);
    }
}

nlohmann::json tree_json(const DecompositionTree &tree,
                         const std::vector<std::optional<Record>> *records,
                         size_t &leaf_index) {
    nlohmann::json j;
    if (tree.is_leaf()) {
        const Leaf &leaf = tree.leaf();
        j["type"] = "leaf";
        j["scenario"] = leaf.canonical.expr.scenario.to_text();
        std::vector<std::string> coeff;
        for (const Rat &c : leaf.canonical.expr.coeff)
            coeff.push_back(to_string(c));
        j["canonical"] = coeff;
        for (const auto &[name, bound] : leaf.canonical.bounds)
            j["bounds"][name] = to_string(bound.value);
        j["sign"] = leaf.sign;
        j["scale"] = to_string(leaf.scale);
        j["shift"] = to_string(leaf.shift);
        j["witness"] = cycle_string(leaf.witness);
        if (leaf.orbit_rank != 0)
            j["orbit-rank"] = to_string(leaf.orbit_rank);
        if (!leaf.structure.steps.empty())
            j["removed-structure"] = structure_summary(leaf.structure);
        if (records) {
            const auto &rec = (*records)[leaf_index];
            if (rec) {
                j["record"]["key"] = rec->key;
                j["record"]["names"] = rec->names;
            } else {
                j["record"] = nullptr;
            }
        }
        ++leaf_index;
        return j;
    }
    const Product &p = tree.product();
    j["type"] = "product";
    j["kappa"] = to_string(p.kappa);
    if (p.shift != 0)
        j["shift"] = to_string(p.shift);
    if (!p.structure.steps.empty())
        j["removed-structure"] = structure_summary(p.structure);
    for (size_t c = 0; c < p.children.size(); ++c) {
        nlohmann::json child = tree_json(p.children[c], records, leaf_index);
        std::vector<int> parties;
        for (int i : p.child_parties[c])
            parties.push_back(i + 1);
        child["parties"] = parties;
        j["factors"].push_back(std::move(child));
    }
    return j;
}

} // namespace

std::string tree_to_text(const DecompositionTree &tree,
                         const std::vector<std::optional<Record>> *records) {
    std::ostringstream os;
    size_t leaf_index = 0;
    tree_text(os, tree, records, leaf_index, 0);
    return os.str();
}

std::string tree_to_json(const DecompositionTree &tree,
                         const std::vector<std::optional<Record>> *records) {
    size_t leaf_index = 0;
    return tree_json(tree, records, leaf_index).dump(2) + "\n";
}

} // namespace bellcanon
