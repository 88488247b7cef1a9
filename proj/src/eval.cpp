#include "mimax/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "mimax/errors.hpp"

namespace mimax::eval {

Contingency contingency(const std::vector<int> &induced, const std::vector<int> &gold,
                        std::size_t num_labels, std::size_t num_tags) {
    if (induced.empty() || induced.size() != gold.size())
        throw ValidationError("contingency needs equal-length nonempty sequences (got " +
                              std::to_string(induced.size()) + " and " +
                              std::to_string(gold.size()) + ")");
    for (std::size_t i = 0; i < induced.size(); ++i) {
        if (induced[i] < 0 || gold[i] < 0)
            throw ValidationError("negative label at position " + std::to_string(i));
        num_labels = std::max(num_labels, static_cast<std::size_t>(induced[i]) + 1);
        num_tags = std::max(num_tags, static_cast<std::size_t>(gold[i]) + 1);
    }
    Contingency c;
    c.num_labels = num_labels;
    c.num_tags = num_tags;
    c.counts.assign(num_labels * num_tags, 0);
    for (std::size_t i = 0; i < induced.size(); ++i)
        ++c.counts[static_cast<std::size_t>(induced[i]) * num_tags +
                   static_cast<std::size_t>(gold[i])];
    c.total = static_cast<std::int64_t>(induced.size());
    return c;
}

std::vector<int> m2o_mapping(const Contingency &c) {
    std::vector<int> mapping(c.num_labels, 0);
    for (std::size_t z = 0; z < c.num_labels; ++z) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < c.num_tags; ++t)
            if (c.at(z, t) > c.at(z, best)) best = t;
        mapping[z] = static_cast<int>(best);
    }
    return mapping;
}

double many_to_one(const Contingency &c) {
    std::int64_t correct = 0;
    for (std::size_t z = 0; z < c.num_labels; ++z) {
        std::int64_t best = 0;
        for (std::size_t t = 0; t < c.num_tags; ++t) best = std::max(best, c.at(z, t));
        correct += best;
    }
    return static_cast<double>(correct) / static_cast<double>(c.total);
}

namespace {

inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace

double v_measure(const Contingency &c) {
    const double n = static_cast<double>(c.total);
    std::vector<double> label_mass(c.num_labels, 0.0), tag_mass(c.num_tags, 0.0);
    for (std::size_t z = 0; z < c.num_labels; ++z)
        for (std::size_t t = 0; t < c.num_tags; ++t) {
            label_mass[z] += static_cast<double>(c.at(z, t));
            tag_mass[t] += static_cast<double>(c.at(z, t));
        }

    double h_gold = 0.0, h_induced = 0.0;
    for (double v : tag_mass) h_gold -= xlog2x(v / n);
    for (double v : label_mass) h_induced -= xlog2x(v / n);

    double h_gold_given = 0.0;    // H(gold | induced)
    double h_induced_given = 0.0;  // H(induced | gold)
    for (std::size_t z = 0; z < c.num_labels; ++z) {
        for (std::size_t t = 0; t < c.num_tags; ++t) {
            const double joint = static_cast<double>(c.at(z, t)) / n;
            if (joint == 0.0) continue;
            h_gold_given -= joint * std::log2(joint / (label_mass[z] / n));
            h_induced_given -= joint * std::log2(joint / (tag_mass[t] / n));
        }
    }

    const double homogeneity = h_gold == 0.0 ? 1.0 : 1.0 - h_gold_given / h_gold;
    const double completeness = h_induced == 0.0 ? 1.0 : 1.0 - h_induced_given / h_induced;
    if (homogeneity + completeness == 0.0) return 0.0;
    return 2.0 * homogeneity * completeness / (homogeneity + completeness);
}

Report evaluate_model(const model::ModelParams &params, const corpus::Vocab &vocab,
                      const std::vector<corpus::TaggedSentence> &labeled) {
    std::map<std::string, int> tag_ids;
    std::int64_t tokens = 0;
    for (const corpus::TaggedSentence &sent : labeled) {
        for (const corpus::TaggedToken &tok : sent) {
            tag_ids.emplace(tok.tag, 0);
            ++tokens;
        }
    }
    if (tokens == 0) throw ValidationError("labeled corpus has no tokens");
    int next = 0;
    for (auto &[tag, id] : tag_ids) id = next++;

    std::unordered_map<std::int32_t, int> label_cache;
    std::vector<int> induced, gold;
    induced.reserve(static_cast<std::size_t>(tokens));
    gold.reserve(static_cast<std::size_t>(tokens));
    for (const corpus::TaggedSentence &sent : labeled) {
        for (const corpus::TaggedToken &tok : sent) {
            const std::int32_t word = vocab.id_of(tok.token);
            auto it = label_cache.find(word);
            if (it == label_cache.end())
                it = label_cache.emplace(word, model::induce_label(params, word, vocab)).first;
            induced.push_back(it->second);
            gold.push_back(tag_ids[tok.tag]);
        }
    }

    const Contingency c = contingency(induced, gold,
                                      static_cast<std::size_t>(params.hyper.labels),
                                      tag_ids.size());
    Report report;
    report.m2o = many_to_one(c);
    report.v = v_measure(c);
    report.n_tokens = c.total;
    report.num_labels = params.hyper.labels;
    report.num_gold_tags = static_cast<int>(tag_ids.size());
    report.mapping = m2o_mapping(c);
    report.tag_names.resize(tag_ids.size());
    for (const auto &[tag, id] : tag_ids) report.tag_names[static_cast<std::size_t>(id)] = tag;
    return report;
}

std::string report_json(const Report &report) {
    nlohmann::json mapping = nlohmann::json::object();
    for (std::size_t z = 0; z < report.mapping.size(); ++z)
        mapping[std::to_string(z)] = report.tag_names[static_cast<std::size_t>(report.mapping[z])];
    const nlohmann::json j = {{"m2o", report.m2o},
                              {"v_measure", report.v},
                              {"n_tokens", report.n_tokens},
                              {"m", report.num_labels},
                              {"num_gold_tags", report.num_gold_tags},
                              {"mapping", mapping}};
    return j.dump();
}

}  // namespace mimax::eval
