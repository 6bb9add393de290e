#include <autopass/error.hpp>
#include <autopass/sync.hpp>

namespace autopass::sync {

using nlohmann::json;

std::string canonical_json(const json& j) {
    // nlohmann objects are std::map-backed, so keys come out sorted.
    return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

json policy_record_to_json(const PolicyRecord& record) {
    return json{{"domain", record.domain}, {"policy", record.policy}, {"record_version", record.record_version}};
}

PolicyRecord policy_record_from_json(const json& j) {
    try {
        PolicyRecord r;
        r.domain = j.at("domain").get<std::string>();
        r.policy = j.at("policy").get<PasswordPolicy>();
        r.record_version = j.at("record_version").get<std::uint64_t>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::VaultFormat, std::string("malformed policy record: ") + e.what());
    }
}

json user_record_to_json(const UserRecord& record) {
    json sites = json::object();
    for (const auto& [key, site] : record.sites) sites[key] = site_config_to_json(site);
    return json{{"user_id", record.user_id}, {"sites", std::move(sites)}, {"record_version", record.record_version}};
}

UserRecord user_record_from_json(const json& j) {
    try {
        UserRecord r;
        r.user_id = j.at("user_id").get<std::string>();
        for (const auto& [key, site] : j.at("sites").items()) {
            auto config = site_config_from_json(site);
            if (config.site_key.value != key) throw Error(ErrorCode::VaultFormat, "site key mismatch in user record");
            r.sites.emplace(key, std::move(config));
        }
        r.record_version = j.at("record_version").get<std::uint64_t>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::VaultFormat, std::string("malformed user record: ") + e.what());
    }
}

}  // namespace autopass::sync
