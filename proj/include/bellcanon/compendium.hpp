#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bellcanon/canonical.hpp"
#include "bellcanon/textdoc.hpp"

namespace bellcanon {

enum class Notation { Probabilities, CollinsGisin };

// One interchange document: a scenario, a coefficient block in the declared
// notation, optional named upper bounds and free-form metadata. Parsing and
// serialization round-trip; to_expression converts the coefficient block to
// the full-probability form used everywhere else.
//
// Document schema (all values are exact rationals written as `p` or `p/q`):
//   scenario: (2,2,2) | [(3 2) (2 2 2)]
//   notation: probabilities | collins-gisin
//   coefficients: [flat list]
//   bounds:           # optional, upper bounds per set name
//     local: 2
//   metadata:         # optional
//     names: [CHSH]
//     references: ["..."]
//     notes: "..."
struct InterchangeDocument {
    Scenario scenario;
    Notation notation = Notation::Probabilities;
    std::vector<Rat> coefficients; // in document order for the notation
    std::map<std::string, Rat> bounds;
    std::vector<std::string> names;
    std::vector<std::string> references;
    std::string notes;

    OrientedExpression to_expression() const;
    static InterchangeDocument from_expression(const OrientedExpression &e);
};

InterchangeDocument parse_interchange(const std::string &text);
std::string serialize_interchange(const InterchangeDocument &doc);

// Collins-Gisin coefficient order: one slot per party with index 0 meaning
// "marginalized away" followed by (outcome, setting) pairs with outcome
// below the setting's last, outcome fastest; slots combine party-major with
// party 1 fastest. On conversion, marginalized parties are expanded over
// their first setting.
long long cg_dimension(const Scenario &s);
BellExpression cg_to_full(const Scenario &s, const std::vector<Rat> &cg);

// Applies a scenario reordering directly to a Collins-Gisin coefficient
// block; the result lives in map.apply(s).
std::vector<Rat> cg_reorder(const Scenario &s, const std::vector<Rat> &cg,
                            const ReorderMap &map);

// ---------------------------------------------------------------------------
// Records and the content-addressed store

struct Record {
    std::string key; // canonical content digest, lowercase hex
    OrientedExpression expr;
    std::vector<std::string> names;
    std::map<std::string, std::string> bound_provenance;
    std::vector<std::string> references;
    std::string notes;
};

// Digest of the canonical content: sha256 over a length-prefixed
// serialization of the scenario text and the integer coefficient sequence.
std::string canonical_key(const BellExpression &canonical);

// True iff the expression is its own canonical form: decompose yields a
// single leaf with identity witness, rank 1, scale 1, shift 0 and no removed
// structure.
bool is_canonical_form(const BellExpression &e);

Record make_record(const OrientedExpression &canonical);

// One text document per record in a directory tree keyed by digest prefix,
// plus a rebuildable index. Reads are concurrency-safe; writes take a file
// lock on the store directory, and the index is replaced atomically via
// write-then-rename.
class Store {
  public:
    static Store create(const std::filesystem::path &dir);
    static Store open(const std::filesystem::path &dir);

    const std::filesystem::path &dir() const { return dir_; }

    // Stores a canonical record. A different record under the same key is an
    // error unless merge is set, in which case metadata and bounds are
    // merged (conflicting bound values still error).
    void store(const Record &r, bool merge = false);
    std::optional<Record> lookup(const std::string &key) const;
    // Canonicalizes the argument; returns the record of its canonical form
    // when the expression is non-composite and stored.
    std::optional<Record> find_by_expression(const OrientedExpression &e) const;
    std::vector<std::string> keys() const;
    void rebuild_index() const;

  private:
    explicit Store(std::filesystem::path dir) : dir_(std::move(dir)) {}
    std::filesystem::path object_path(const std::string &key) const;
    std::filesystem::path dir_;
};

Record parse_record(const std::string &text);
std::string serialize_record(const Record &r);

// ---------------------------------------------------------------------------
// Matching

// The decomposition of an expression with every leaf looked up in the store.
struct MatchReport {
    DecompositionTree tree;
    std::vector<std::optional<Record>> records; // aligned with tree.leaves()
};

MatchReport match(const OrientedExpression &e, const Store &db,
                  const DecomposeOptions &opts = {});

// Text and structured renderings of decomposition trees and match reports.
std::string tree_to_text(const DecompositionTree &tree,
                         const std::vector<std::optional<Record>> *records = nullptr);
std::string tree_to_json(const DecompositionTree &tree,
                         const std::vector<std::optional<Record>> *records = nullptr);

} // namespace bellcanon
