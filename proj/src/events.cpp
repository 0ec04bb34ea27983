#include "sealbid/events.hpp"

#include <fstream>
#include <sstream>

namespace sealbid {

Bytes Event::attested_payload() const {
  return to_bytes(kind + "\n" + auction + "\n" + data.dump());
}

json attestation_to_json(const enclave::AttestationReport& report) {
  Bytes sig(report.signature.r.begin(), report.signature.r.end());
  sig.insert(sig.end(), report.signature.s.begin(), report.signature.s.end());
  sig.push_back(report.signature.recovery_id);
  return {{"code_hash", to_hex(report.code_hash)},
          {"output_digest", to_hex(report.output_digest)},
          {"signature", to_hex(sig)}};
}

enclave::AttestationReport attestation_from_json(const json& j) {
  enclave::AttestationReport r;
  r.code_hash = fixed_from_hex<32>(j.at("code_hash").get<std::string>());
  r.output_digest = fixed_from_hex<32>(j.at("output_digest").get<std::string>());
  auto sig = fixed_from_hex<65>(j.at("signature").get<std::string>());
  std::copy(sig.begin(), sig.begin() + 32, r.signature.r.begin());
  std::copy(sig.begin() + 32, sig.begin() + 64, r.signature.s.begin());
  r.signature.recovery_id = sig[64];
  return r;
}

json Event::to_json() const {
  json j = {{"seq", seq}, {"event", kind}, {"auction", auction}, {"data", data}};
  if (attestation) j["attestation"] = attestation_to_json(*attestation);
  return j;
}

Event Event::from_json(const json& j) {
  Event e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.kind = j.at("event").get<std::string>();
  e.auction = j.at("auction").get<std::string>();
  e.data = j.at("data");
  if (j.contains("attestation")) e.attestation = attestation_from_json(j.at("attestation"));
  return e;
}

const Event& EventLog::emit(std::string kind, std::string auction, json data, const enclave::Enclave* attestor) {
  Event e;
  e.seq = events_.size();
  e.kind = std::move(kind);
  e.auction = std::move(auction);
  e.data = std::move(data);
  if (attestor != nullptr) e.attestation = attestor->attest(e.attested_payload());
  events_.push_back(std::move(e));
  return events_.back();
}

std::string EventLog::text(std::size_t end) const {
  std::string out;
  for (std::size_t i = 0; i < end && i < events_.size(); ++i) {
    out += events_[i].to_json().dump();
    out += '\n';
  }
  return out;
}

std::optional<std::size_t> EventLog::find(std::string_view kind) const {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (events_[i].kind == kind) return i;
  }
  return std::nullopt;
}

void EventLog::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text();
}

EventLog EventLog::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  EventLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.events_.push_back(Event::from_json(json::parse(line)));
  }
  return log;
}

}  // namespace sealbid
