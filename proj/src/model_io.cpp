#include "sfse/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sfse/error.hpp"
#include "sfse/model_json.hpp"

namespace sfse {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

double number(const json& value, const std::string& what) {
    if (!value.is_number()) throw ConfigError(what + " must be a number");
    return value.get<double>();
}

Matrix parse_block(const json& value, int w, const std::string& what) {
    if (!value.is_array() || value.size() != static_cast<std::size_t>(w) * w)
        throw ConfigError(what + " must be a list of " + std::to_string(w * w) + " [re, im] pairs");
    Matrix block(w, w);
    for (int i = 0; i < w * w; ++i) {
        const json& pair = value[static_cast<std::size_t>(i)];
        if (!pair.is_array() || pair.size() != 2)
            throw ConfigError(what + " entries must be [re, im] pairs");
        block(i / w, i % w) = cplx(number(pair[0], what), number(pair[1], what));
    }
    return block;
}

json block_to_json(const Matrix& block) {
    json out = json::array();
    for (Index i = 0; i < block.rows(); ++i)
        for (Index j = 0; j < block.cols(); ++j) out.push_back({block(i, j).real(), block(i, j).imag()});
    return out;
}

}  // namespace

ImpuritySpec ModelDocument::impurity_spec() const {
    if (named) return expand(*named, hopping);
    if (custom) return *custom;
    return {};
}

ModelDocument model_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("model document must be a JSON object");
    reject_unknown(doc, {"w", "h0", "h1", "hm1", "impurity"}, "model document");
    if (!doc.contains("w") || !doc["w"].is_number_integer() || doc["w"].get<int>() < 1)
        throw ConfigError("model document needs a positive integer 'w'");
    const int w = doc["w"].get<int>();
    auto block = [&](const char* key) {
        return doc.contains(key) ? parse_block(doc[key], w, key) : Matrix(Matrix::Zero(w, w));
    };

    ModelDocument model{HoppingSet(block("h0"), block("h1"), block("hm1")), std::nullopt, std::nullopt};
    if (!model.hopping.connected())
        throw ConfigError("model is disconnected: h1 and hm1 are both zero");

    if (doc.contains("impurity")) {
        const json& imp = doc["impurity"];
        if (!imp.is_object() || !imp.contains("kind") || !imp["kind"].is_string())
            throw ConfigError("impurity must be an object with a string 'kind'");
        const std::string kind = imp["kind"].get<std::string>();
        if (kind == "boundary-coupling") {
            reject_unknown(imp, {"kind", "mu", "mu_r", "mu_l"}, "boundary-coupling impurity");
            if (imp.contains("mu") && (imp.contains("mu_r") || imp.contains("mu_l")))
                throw ConfigError("give either 'mu' or 'mu_r'/'mu_l', not both");
            BoundaryCoupling c;
            if (imp.contains("mu")) c.mu_r = c.mu_l = number(imp["mu"], "mu");
            if (imp.contains("mu_r")) c.mu_r = number(imp["mu_r"], "mu_r");
            if (imp.contains("mu_l")) c.mu_l = number(imp["mu_l"], "mu_l");
            model.named = c;
        } else if (kind == "onsite") {
            reject_unknown(imp, {"kind", "V"}, "onsite impurity");
            if (!imp.contains("V")) throw ConfigError("onsite impurity needs 'V'");
            model.named = Onsite{number(imp["V"], "V")};
        } else if (kind == "custom") {
            reject_unknown(imp, {"kind", "boundary_depth", "entries"}, "custom impurity");
            ImpuritySpec spec;
            if (imp.contains("boundary_depth")) {
                if (!imp["boundary_depth"].is_number_integer() || imp["boundary_depth"].get<int>() < 1)
                    throw ConfigError("boundary_depth must be a positive integer");
                spec.boundary_depth = imp["boundary_depth"].get<int>();
            }
            if (!imp.contains("entries") || !imp["entries"].is_array())
                throw ConfigError("custom impurity needs an 'entries' list");
            for (const json& entry : imp["entries"]) {
                if (!entry.is_object()) throw ConfigError("impurity entries must be objects");
                reject_unknown(entry, {"r", "s", "block"}, "impurity entry");
                if (!entry.contains("r") || !entry["r"].is_number_integer() || !entry.contains("s") ||
                    !entry["s"].is_number_integer() || !entry.contains("block"))
                    throw ConfigError("impurity entries need integer 'r', 's' and a 'block'");
                spec.entries.push_back(
                    {entry["r"].get<int>(), entry["s"].get<int>(), parse_block(entry["block"], w, "block")});
            }
            model.custom = std::move(spec);
        } else {
            throw ConfigError("unknown impurity kind '" + kind + "'");
        }
    }
    return model;
}

json model_to_json_value(const ModelDocument& model) {
    json doc;
    doc["w"] = model.hopping.orbitals();
    doc["h0"] = block_to_json(model.hopping.h0());
    doc["h1"] = block_to_json(model.hopping.h1());
    doc["hm1"] = block_to_json(model.hopping.hm1());
    if (model.named) {
        if (const auto* c = std::get_if<BoundaryCoupling>(&*model.named))
            doc["impurity"] = {{"kind", "boundary-coupling"}, {"mu_r", c->mu_r}, {"mu_l", c->mu_l}};
        else
            doc["impurity"] = {{"kind", "onsite"}, {"V", std::get<Onsite>(*model.named).V}};
    } else if (model.custom) {
        json entries = json::array();
        for (const auto& e : model.custom->entries)
            entries.push_back({{"r", e.row_cell}, {"s", e.col_cell}, {"block", block_to_json(e.block)}});
        doc["impurity"] = {{"kind", "custom"},
                           {"boundary_depth", model.custom->boundary_depth},
                           {"entries", entries}};
    }
    return doc;
}

ModelDocument parse_model(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return model_from_json(doc);
}

std::string model_to_json(const ModelDocument& model) { return model_to_json_value(model).dump(2); }

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace sfse
