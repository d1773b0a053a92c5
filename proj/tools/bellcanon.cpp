// Command-line interface for reducing Bell-like inequalities to canonical
// form and maintaining a compendium of canonical oriented expressions.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bellcanon/compendium.hpp"

using namespace bellcanon;

namespace {

struct CommonOptions {
    std::string input;
    std::string scenario;
    std::string notation = "probabilities";
    std::string db;
    std::string format = "text";
    long long strategy_cap = kDefaultStrategyCap;
};

std::string read_input(const std::string &path) {
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        return os.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UserError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Documents carry their own scenario; --scenario switches to a bare
// whitespace-separated coefficient list instead.
InterchangeDocument load_document(const CommonOptions &opt) {
    std::string text = read_input(opt.input);
    if (opt.scenario.empty())
        return parse_interchange(text);
    InterchangeDocument doc;
    doc.scenario = Scenario::parse(opt.scenario);
    if (opt.notation == "probabilities")
        doc.notation = Notation::Probabilities;
    else if (opt.notation == "collins-gisin")
        doc.notation = Notation::CollinsGisin;
    else
        throw UserError("unknown notation '" + opt.notation + "'");
    std::istringstream is(text);
    std::string token;
    while (is >> token) {
        while (!token.empty() && token.back() == ',')
            token.pop_back();
        if (!token.empty())
            doc.coefficients.push_back(parse_rat(token));
    }
    long long expected = doc.notation == Notation::Probabilities
                             ? doc.scenario.full_dimension()
                             : cg_dimension(doc.scenario);
    if ((long long)doc.coefficients.size() != expected)
        throw UserError("coefficient length mismatch: got " +
                        std::to_string(doc.coefficients.size()) + ", expected " +
                        std::to_string(expected));
    return doc;
}

bool structured(const CommonOptions &opt) {
    if (opt.format == "structured")
        return true;
    if (opt.format == "text")
        return false;
    throw UserError("unknown format '" + opt.format + "' (use text or structured)");
}

Store open_db(const CommonOptions &opt, bool create = false) {
    if (opt.db.empty())
        throw UserError("this command needs --db <dir>");
    std::filesystem::path dir(opt.db);
    if (create && !std::filesystem::exists(dir / "manifest.yaml"))
        return Store::create(dir);
    return Store::open(dir);
}

void add_common(CLI::App *cmd, CommonOptions &opt, bool with_input = true) {
    if (with_input)
        cmd->add_option("input", opt.input, "input document, or - for stdin")
            ->required();
    cmd->add_option("--scenario", opt.scenario,
                    "treat the input as a bare coefficient list in this scenario");
    cmd->add_option("--notation", opt.notation,
                    "coefficient notation for --scenario input "
                    "(probabilities | collins-gisin)");
    cmd->add_option("--db", opt.db, "compendium directory");
    cmd->add_option("--format", opt.format, "output format (text | structured)");
    cmd->add_option("--strategy-cap", opt.strategy_cap,
                    "deterministic-strategy limit for bound computations");
}

int run_canon(const CommonOptions &opt) {
    InterchangeDocument doc = load_document(opt);
    DecompositionTree tree = decompose(doc.to_expression());
    if (!tree.is_leaf())
        throw UserError("the expression is composite; use the decompose command");
    const Leaf &leaf = tree.leaf();
    InterchangeDocument out = InterchangeDocument::from_expression(leaf.canonical);
    out.names = doc.names;
    out.references = doc.references;
    out.notes = doc.notes;
    if (structured(opt)) {
        nlohmann::json j;
        j["document"] = serialize_interchange(out);
        j["key"] = canonical_key(leaf.canonical.expr);
        j["witness"] = cycle_string(leaf.witness);
        j["orbit-rank"] = to_string(leaf.orbit_rank);
        j["scale"] = to_string(leaf.scale);
        j["shift"] = to_string(leaf.shift);
        j["sign"] = leaf.sign;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << serialize_interchange(out);
        std::cout << "# key: " << canonical_key(leaf.canonical.expr) << "\n";
        std::cout << "# witness: " << cycle_string(leaf.witness) << "\n";
        std::cout << "# orbit-rank: " << to_string(leaf.orbit_rank) << "\n";
        std::cout << "# scale: " << to_string(leaf.scale)
                  << "  shift: " << to_string(leaf.shift) << "  sign: " << leaf.sign
                  << "\n";
    }
    return 0;
}

int run_decompose(const CommonOptions &opt) {
    InterchangeDocument doc = load_document(opt);
    DecompositionTree tree = decompose(doc.to_expression());
    std::cout << (structured(opt) ? tree_to_json(tree) : tree_to_text(tree));
    return 0;
}

int run_rank(const CommonOptions &opt) {
    InterchangeDocument doc = load_document(opt);
    OrientedExpression e = doc.to_expression();
    if (!e.expr.scenario.is_canonical())
        throw UserError("rank needs a canonical-form scenario");
    ScenarioGroup group(e.expr.scenario);
    std::cout << to_string(rank_of(e.expr, group)) << "\n";
    return 0;
}

int run_unrank(const CommonOptions &opt, const std::string &rank_text) {
    InterchangeDocument doc = load_document(opt);
    OrientedExpression e = doc.to_expression();
    if (!e.expr.scenario.is_canonical())
        throw UserError("unrank needs a canonical-form scenario");
    ScenarioGroup group(e.expr.scenario);
    Int rank(rank_text);
    BellExpression member = unrank(e.expr, rank, group);
    std::cout << serialize_interchange(
        InterchangeDocument::from_expression(OrientedExpression{member, {}}));
    return 0;
}

int run_local_bound(const CommonOptions &opt) {
    InterchangeDocument doc = load_document(opt);
    Rat bound = local_bound(doc.to_expression().expr, opt.strategy_cap);
    if (structured(opt)) {
        nlohmann::json j;
        j["local-bound"] = to_string(bound);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << to_string(bound) << "\n";
    }
    return 0;
}

int run_facet_check(const CommonOptions &opt, const std::string &bound_text) {
    InterchangeDocument doc = load_document(opt);
    OrientedExpression e = doc.to_expression();
    Rat bound;
    if (!bound_text.empty())
        bound = parse_rat(bound_text);
    else if (doc.bounds.count("local"))
        bound = doc.bounds.at("local");
    else
        throw UserError("facet-check needs --bound or a local bound in the document");
    bool facet = facet_check(e.expr, bound, opt.strategy_cap);
    if (structured(opt)) {
        nlohmann::json j;
        j["facet"] = facet;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << (facet ? "facet" : "not a facet") << "\n";
    }
    return 0;
}

int run_match(const CommonOptions &opt) {
    InterchangeDocument doc = load_document(opt);
    Store db = open_db(opt);
    MatchReport report = match(doc.to_expression(), db);
    std::cout << (structured(opt) ? tree_to_json(report.tree, &report.records)
                                  : tree_to_text(report.tree, &report.records));
    return 0;
}

int run_import(const CommonOptions &opt, bool merge) {
    InterchangeDocument doc = load_document(opt);
    Store db = open_db(opt, true);
    DecompositionTree tree = decompose(doc.to_expression());
    if (!tree.is_leaf())
        throw UserError("composite expressions are not stored; import their "
                        "components (see the decompose command)");
    Record r = make_record(tree.leaf().canonical);
    r.names = doc.names;
    r.references = doc.references;
    r.notes = doc.notes;
    db.store(r, merge);
    std::cout << r.key << "\n";
    return 0;
}

int run_export(const CommonOptions &opt, const std::string &key) {
    Store db = open_db(opt);
    auto record = db.lookup(key);
    if (!record)
        throw UserError("no record with key " + key);
    std::cout << serialize_record(*record);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"canonical forms and a compendium for Bell-like inequalities"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string rank_text, bound_text, export_key;
    bool merge = false;

    add_common(app.add_subcommand("canon",
                                  "print the canonical form, witness and rank"),
               opt);
    add_common(app.add_subcommand("decompose",
                                  "decompose into canonical constituents"),
               opt);
    add_common(app.add_subcommand("rank", "lexicographic rank within the orbit"), opt);
    auto *unrank_cmd = app.add_subcommand(
        "unrank", "the orbit member of a given rank (input: minimal representative)");
    add_common(unrank_cmd, opt);
    unrank_cmd->add_option("--rank", rank_text, "1-based rank")->required();
    add_common(app.add_subcommand("local-bound",
                                  "maximum over deterministic strategies"),
               opt);
    auto *facet_cmd =
        app.add_subcommand("facet-check", "certify that an inequality is a facet");
    add_common(facet_cmd, opt);
    facet_cmd->add_option("--bound", bound_text, "the local bound to certify");
    add_common(app.add_subcommand("match",
                                  "decompose and look the constituents up in the db"),
               opt);
    auto *import_cmd = app.add_subcommand("import", "canonicalize and store");
    add_common(import_cmd, opt);
    import_cmd->add_flag("--merge", merge, "merge metadata into an existing record");
    auto *export_cmd = app.add_subcommand("export", "print a stored record");
    export_cmd->add_option("key", export_key, "record key")->required();
    add_common(export_cmd, opt, false);
    auto *db_cmd = app.add_subcommand("db", "store maintenance");
    auto *rebuild_cmd = db_cmd->add_subcommand("rebuild-index", "rebuild index.tsv");
    add_common(rebuild_cmd, opt, false);
    db_cmd->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("canon"))
            return run_canon(opt);
        if (app.got_subcommand("decompose"))
            return run_decompose(opt);
        if (app.got_subcommand("rank"))
            return run_rank(opt);
        if (app.got_subcommand("unrank"))
            return run_unrank(opt, rank_text);
        if (app.got_subcommand("local-bound"))
            return run_local_bound(opt);
        if (app.got_subcommand("facet-check"))
            return run_facet_check(opt, bound_text);
        if (app.got_subcommand("match"))
            return run_match(opt);
        if (app.got_subcommand("import"))
            return run_import(opt, merge);
        if (app.got_subcommand("export"))
            return run_export(opt, export_key);
        if (app.got_subcommand("db")) {
            open_db(opt).rebuild_index();
            return 0;
        }
        throw UserError("no command given");
    } catch (const UserError &err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception &err) {
        std::cerr << "internal error: " << err.what() << "\n";
        return 2;
    }
}
