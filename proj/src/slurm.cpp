/* Copyright 2026 The Floworc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "floworc/slurm.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace floworc {

using nlohmann::json;

CommandResult SubprocessRunner::run(const std::vector<std::string>& argv) {
    if (argv.empty()) throw Error("empty argv");
    std::string cmd;
    for (const auto& a : argv) {
        std::string quoted = "'";
        for (char c : a) {
            if (c == '\'') quoted += "'\\''";
            else quoted += c;
        }
        quoted += "'";
        if (!cmd.empty()) cmd += ' ';
        cmd += quoted;
    }
    cmd += " 2>/dev/null";
    CommandResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw Error("cannot spawn command: " + argv.front());
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), n);
    const int status = pclose(pipe);
    result.exit_code = status < 0 ? -1 : (status >> 8) & 0xff;
    return result;
}

CommandResult MockCommandRunner::run(const std::vector<std::string>& argv) {
    history_.push_back(argv);
    if (responses_.empty()) return CommandResult{0, "", ""};
    CommandResult r = std::move(responses_.front());
    responses_.pop_front();
    return r;
}

std::vector<std::string> render_template(const std::vector<std::string>& tmpl,
                                         const std::map<std::string, std::string>& fields) {
    std::vector<std::string> argv;
    argv.reserve(tmpl.size());
    for (const auto& token : tmpl) {
        std::string out;
        for (std::size_t i = 0; i < token.size();) {
            if (token[i] != '{') {
                out += token[i++];
                continue;
            }
            const auto close = token.find('}', i);
            if (close == std::string::npos) throw Error("unterminated field in template: " + token);
            const std::string name = token.substr(i + 1, close - i - 1);
            auto it = fields.find(name);
            if (it == fields.end()) throw Error("unknown template field '" + name + "'");
            out += it->second;
            i = close + 1;
        }
        argv.push_back(std::move(out));
    }
    return argv;
}

std::vector<std::string> expand_nodelist(std::string_view nodelist) {
    std::vector<std::string> nodes;
    std::string prefix;
    for (std::size_t i = 0; i < nodelist.size();) {
        const char c = nodelist[i];
        if (c == ',') {
            if (!prefix.empty()) nodes.push_back(prefix);
            prefix.clear();
            ++i;
        } else if (c == '[') {
            const auto close = nodelist.find(']', i);
            if (close == std::string_view::npos)
                throw Error("unbalanced '[' in node list: " + std::string(nodelist));
            std::string ranges(nodelist.substr(i + 1, close - i - 1));
            std::istringstream in(ranges);
            std::string part;
            while (std::getline(in, part, ',')) {
                const auto dash = part.find('-');
                if (dash == std::string::npos) {
                    nodes.push_back(prefix + part);
                } else {
                    const long lo = std::stol(part.substr(0, dash));
                    const long hi = std::stol(part.substr(dash + 1));
                    const std::size_t width = dash;  // zero-padded ranges keep their width
                    for (long v = lo; v <= hi; ++v) {
                        std::string num = std::to_string(v);
                        while (num.size() < width && part[0] == '0') num.insert(num.begin(), '0');
                        nodes.push_back(prefix + num);
                    }
                }
            }
            prefix.clear();
            i = close + 1;
            if (i < nodelist.size() && nodelist[i] == ',') ++i;
        } else {
            prefix += c;
            ++i;
        }
    }
    if (!prefix.empty()) nodes.push_back(prefix);
    return nodes;
}

std::string to_string(SlurmJobState s) {
    switch (s) {
        case SlurmJobState::Pending: return "PENDING";
        case SlurmJobState::Running: return "RUNNING";
        case SlurmJobState::Cancelled: return "CANCELLED";
        case SlurmJobState::Completed: return "COMPLETED";
    }
    return "PENDING";
}

SlurmTemplates SlurmTemplates::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open SLURM template file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("SLURM template file is not valid JSON: ") + e.what());
    }
    SlurmTemplates t;
    if (doc.contains("expand")) t.expand = doc["expand"].get<std::vector<std::string>>();
    if (doc.contains("poll")) t.poll = doc["poll"].get<std::vector<std::string>>();
    if (doc.contains("update")) t.update = doc["update"].get<std::vector<std::string>>();
    if (doc.contains("cancel")) t.cancel = doc["cancel"].get<std::vector<std::string>>();
    return t;
}

std::string SlurmTemplates::to_json_text() const {
    return json{{"expand", expand}, {"poll", poll}, {"update", update}, {"cancel", cancel}}
        .dump(2);
}

SlurmAdapter::SlurmAdapter(CommandRunner& runner, SlurmTemplates templates,
                           std::string main_job_id, std::string qos, std::string worker_launcher,
                           int main_n_nodes)
    : runner_(runner),
      templates_(std::move(templates)),
      main_job_id_(std::move(main_job_id)),
      qos_(std::move(qos)),
      worker_launcher_(std::move(worker_launcher)),
      main_nodes_(main_n_nodes) {}

SlurmJobRef SlurmAdapter::expand(int n_nodes) {
    const auto argv = render_template(templates_.expand,
                                      {{"main_job_id", main_job_id_},
                                       {"qos", qos_},
                                       {"n_nodes", std::to_string(n_nodes)},
                                       {"worker_launcher", worker_launcher_}});
    const CommandResult r = runner_.run(argv);
    if (r.exit_code != 0)
        throw ProviderRejection("sbatch failed with exit " + std::to_string(r.exit_code) + ": " +
                                r.err);
    // Accept both "Submitted batch job 123" and --parsable style "123;cluster".
    std::string id;
    std::string token;
    auto consider = [&]() {
        if (id.empty() && !token.empty() &&
            std::all_of(token.begin(), token.end(),
                        [](unsigned char c) { return std::isdigit(c); }))
            id = token;
        token.clear();
    };
    for (char c : r.out) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ';') consider();
        else token += c;
    }
    consider();
    if (id.empty()) throw ProviderRejection("cannot parse job id from sbatch output: " + r.out);
    SlurmJobRef job;
    job.job_id = id;
    job.kind = SlurmJobKind::Expand;
    job.depends_on = main_job_id_;
    job.state = SlurmJobState::Pending;
    job.n_nodes = n_nodes;
    return job;
}

std::pair<SlurmJobState, std::vector<std::string>> SlurmAdapter::poll(SlurmJobRef& job) {
    const auto argv = render_template(templates_.poll, {{"job_id", job.job_id}});
    const CommandResult r = runner_.run(argv);
    std::string line = r.out;
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (r.exit_code != 0 || line.empty()) {
        // The queue no longer knows the job.
        job.state = SlurmJobState::Cancelled;
        return {job.state, {}};
    }
    std::istringstream in(line);
    std::string state_word, nodelist;
    in >> state_word;
    in >> nodelist;
    if (state_word == "RUNNING") {
        job.state = SlurmJobState::Running;
        job.node_ids = nodelist.empty() ? std::vector<std::string>{} : expand_nodelist(nodelist);
    } else if (state_word == "PENDING" || state_word == "CONFIGURING") {
        job.state = SlurmJobState::Pending;
        job.node_ids.clear();
    } else if (state_word == "COMPLETED") {
        job.state = SlurmJobState::Completed;
    } else {
        job.state = SlurmJobState::Cancelled;
    }
    return {job.state, job.node_ids};
}

void SlurmAdapter::attach(SlurmJobRef& expand_job) {
    if (expand_job.state != SlurmJobState::Running)
        throw ProviderRejection("cannot attach job " + expand_job.job_id + " in state " +
                                to_string(expand_job.state));
    attached_.emplace(expand_job.job_id, expand_job.n_nodes);  // repeat attach keeps the count
    int target = main_nodes_;
    for (const auto& [id, n] : attached_) target += n;
    const auto argv = render_template(
        templates_.update,
        {{"main_job_id", main_job_id_}, {"num_nodes", std::to_string(target)}});
    CommandResult r = runner_.run(argv);
    if (r.exit_code != 0) r = runner_.run(argv);  // one retry
    if (r.exit_code != 0) {
        attached_.erase(expand_job.job_id);
        throw ProviderRejection("scontrol update failed twice for job " + expand_job.job_id);
    }
}

void SlurmAdapter::shrink(SlurmJobRef& expand_job) {
    if (expand_job.state == SlurmJobState::Cancelled)
        throw ProviderRejection("expand job " + expand_job.job_id + " is already cancelled");
    const auto cancel_argv =
        render_template(templates_.cancel, {{"expand_job_id", expand_job.job_id}});
    const CommandResult cancel = runner_.run(cancel_argv);
    if (cancel.exit_code != 0)
        throw ProviderRejection("scancel failed for job " + expand_job.job_id);
    expand_job.state = SlurmJobState::Cancelled;
    attached_.erase(expand_job.job_id);
    int target = main_nodes_;
    for (const auto& [id, n] : attached_) target += n;
    const auto update_argv = render_template(
        templates_.update,
        {{"main_job_id", main_job_id_}, {"num_nodes", std::to_string(target)}});
    CommandResult r = runner_.run(update_argv);
    if (r.exit_code != 0) r = runner_.run(update_argv);
    if (r.exit_code != 0)
        throw ProviderRejection("scontrol update failed twice after scancel of " +
                                expand_job.job_id);
}

}  // namespace floworc
