#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sealbid/enclave.hpp"

namespace sealbid {

using json = nlohmann::json;

struct Event {
  std::uint64_t seq = 0;
  std::string kind;
  std::string auction;
  json data;
  std::optional<enclave::AttestationReport> attestation;

  /// Bytes covered by the attestation: kind ‖ '\n' ‖ auction ‖ '\n' ‖ compact(data).
  Bytes attested_payload() const;

  json to_json() const;
  static Event from_json(const json& j);
};

json attestation_to_json(const enclave::AttestationReport& report);
enclave::AttestationReport attestation_from_json(const json& j);

/// Append-only public event stream, serialised as one JSON object per line.
class EventLog {
 public:
  /// Records an event; when `attestor` is given the event carries its attestation report.
  const Event& emit(std::string kind, std::string auction, json data, const enclave::Enclave* attestor = nullptr);

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  /// Serialised lines of events [0, end).
  std::string text(std::size_t end) const;
  std::string text() const { return text(events_.size()); }

  /// Index of the first event of `kind`, if any.
  std::optional<std::size_t> find(std::string_view kind) const;

  void write(const std::filesystem::path& path) const;
  static EventLog read(const std::filesystem::path& path);

 private:
  std::vector<Event> events_;
};

}  // namespace sealbid
