#include "mddr/evalkit/protocol.hpp"

#include <algorithm>
#include <set>

#include "mddr/common/errors.hpp"

namespace mddr::evalkit {

const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::I: return "I";
        case Protocol::II: return "II";
        case Protocol::III: return "III";
    }
    return "?";
}

Protocol protocol_from_string(const std::string& s) {
    if (s == "I" || s == "1") return Protocol::I;
    if (s == "II" || s == "2") return Protocol::II;
    if (s == "III" || s == "3") return Protocol::III;
    throw ValidationError("unknown protocol '" + s + "' (expected I, II or III)");
}

void ProtocolSpec::validate() const {
    if (train_domains.empty()) {
        throw ValidationError("ProtocolSpec: no training domains");
    }
    std::set<std::string> seen(train_domains.begin(), train_domains.end());
    if (seen.size() != train_domains.size()) {
        throw ValidationError("ProtocolSpec: duplicate training domain");
    }
    if (seen.count(test_domain) != 0) {
        throw ValidationError("ProtocolSpec: test domain '" + test_domain +
                              "' appears in the training domains");
    }
    if (protocol == Protocol::III && train_domains.size() != 1) {
        throw ValidationError("ProtocolSpec: protocol III trains on exactly one domain");
    }
    if (protocol == Protocol::II && train_domains.size() != 2) {
        throw ValidationError("ProtocolSpec: protocol II trains on exactly two domains");
    }
    if (protocol == Protocol::I && train_domains.size() < 2) {
        throw ValidationError("ProtocolSpec: protocol I trains on all domains but one (>= 2)");
    }
}

std::string ProtocolSpec::name() const {
    std::string s;
    for (size_t i = 0; i < train_domains.size(); ++i) {
        if (i) s += "+";
        s += train_domains[i];
    }
    return s + "->" + test_domain;
}

std::vector<ProtocolSpec> enumerate_protocols(const std::vector<std::string>& domain_ids,
                                              Protocol protocol) {
    const size_t n = domain_ids.size();
    if (n < 2) throw ValidationError("enumerate_protocols: need at least 2 domains");
    std::set<std::string> seen(domain_ids.begin(), domain_ids.end());
    if (seen.size() != n) throw ValidationError("enumerate_protocols: duplicate domain id");

    std::vector<ProtocolSpec> specs;
    switch (protocol) {
        case Protocol::I:
            for (size_t t = 0; t < n; ++t) {
                ProtocolSpec s;
                s.protocol = Protocol::I;
                s.test_domain = domain_ids[t];
                for (size_t i = 0; i < n; ++i) {
                    if (i != t) s.train_domains.push_back(domain_ids[i]);
                }
                specs.push_back(std::move(s));
            }
            break;
        case Protocol::II:
            for (size_t i = 0; i < n; ++i) {
                for (size_t j = i + 1; j < n; ++j) {
                    for (size_t t = 0; t < n; ++t) {
                        if (t == i || t == j) continue;
                        ProtocolSpec s;
                        s.protocol = Protocol::II;
                        s.train_domains = {domain_ids[i], domain_ids[j]};
                        s.test_domain = domain_ids[t];
                        specs.push_back(std::move(s));
                    }
                }
            }
            break;
        case Protocol::III:
            for (size_t i = 0; i < n; ++i) {
                for (size_t t = 0; t < n; ++t) {
                    if (t == i) continue;
                    ProtocolSpec s;
                    s.protocol = Protocol::III;
                    s.train_domains = {domain_ids[i]};
                    s.test_domain = domain_ids[t];
                    specs.push_back(std::move(s));
                }
            }
            break;
    }
    for (const auto& s : specs) s.validate();
    return specs;
}

}  // namespace mddr::evalkit
