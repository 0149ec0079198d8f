// Run configuration: one JSON document with mission, uncertainty, hyper and
// network sections. Unspecified fields keep their defaults.
#ifndef HELIOS_CONFIG_HPP
#define HELIOS_CONFIG_HPP

#include <string>

#include "helios/astro.hpp"
#include "helios/net.hpp"
#include "helios/ppo.hpp"
#include "helios/uncertainty.hpp"

namespace helios {

struct RunConfig {
    MissionConfig mission;
    UncertaintyConfig uncertainty;
    HyperParams hyper;
    NetworkSpec network;
    std::uint64_t seed = 0;
    std::string output_dir = "runs/default";

    void validate() const;
};

/// Parses a config document, merging given fields over the defaults.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

std::string run_config_to_json(const RunConfig& config);
void save_run_config(const RunConfig& config, const std::string& path);

}  // namespace helios

#endif
