#include "dmacap/scenario.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "dmacap/errors.hpp"

namespace dmacap
{

  using nlohmann::json;

  namespace
  {
    const json& require(const json& obj, const char* key, const std::string& where)
    {
      if (not obj.is_object() or not obj.contains(key))
        throw SchemaError(where + ": missing '" + key + "'");
      return obj.at(key);
    }

    std::string requireString(const json& obj, const char* key, const std::string& where)
    {
      const auto& v = require(obj, key, where);
      if (not v.is_string())
        throw SchemaError(where + "." + key + ": expected string");
      return v.get<std::string>();
    }

    bool optionalBool(const json& obj, const char* key, bool fallback, const std::string& where)
    {
      if (not obj.contains(key))
        return fallback;
      if (not obj.at(key).is_boolean())
        throw SchemaError(where + "." + key + ": expected boolean");
      return obj.at(key).get<bool>();
    }

    Ear parseEar(const json& v, const MemoryProfile& profile, const std::string& peripheral,
                 const std::string& where)
    {
      if (v.is_null())
        return std::monostate{};

      if (v.is_object())
        {
          if (v.contains("i2c_address"))
            return I2cAddress{std::uint8_t(parse_integer(v["i2c_address"], where))};
          if (v.contains("spi_select"))
            return SpiSelect{v["spi_select"].get<std::string>()};
          if (v.contains("adc_channels"))
            return AdcChannels{std::uint32_t(parse_integer(v["adc_channels"], where))};
          throw SchemaError(where + ": unrecognised EAR object");
        }

      EarKind kind = EarKind::None;
      if (const auto* p = profile.findPeripheral(peripheral))
        kind = p->earKind;
      else
        kind = v.is_string() and not v.get<std::string>().starts_with("0x")
                 ? EarKind::SpiSlaveSelect
                 : EarKind::I2cSlaveAddress;

      switch (kind)
        {
        case EarKind::I2cSlaveAddress:
          {
            auto value = parse_integer(v, where);
            if (value > 0x7f)
              throw SchemaError(where + ": I2C address exceeds 7 bits");
            return I2cAddress{std::uint8_t(value)};
          }
        case EarKind::SpiSlaveSelect:
          if (not v.is_string())
            throw SchemaError(where + ": SPI slave select must be a string");
          return SpiSelect{v.get<std::string>()};
        case EarKind::AdcChannelMask:
          if (v.is_array())
            {
              std::uint32_t mask = 0;
              for (const auto& ch : v)
                {
                  auto c = parse_integer(ch, where);
                  if (c >= 32)
                    throw SchemaError(where + ": ADC channel out of range");
                  mask |= 1u << c;
                }
              return AdcChannels{mask};
            }
          return AdcChannels{std::uint32_t(parse_integer(v, where))};
        case EarKind::None:
          throw SchemaError(where + ": peripheral " + peripheral + " takes no EAR parameter");
        }
      return std::monostate{};
    }

    std::uint8_t parseRights(const json& v, const std::string& where)
    {
      std::uint8_t bits = 0;
      auto one = [&](const json& r) {
        if (not r.is_string())
          throw SchemaError(where + ": rights must be strings");
        // Accept "READ|WRITE" as well as separate entries.
        auto text = r.get<std::string>();
        std::size_t start = 0;
        while (start <= text.size())
          {
            auto bar = text.find('|', start);
            auto piece = text.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
            bits |= parse_right(piece);
            if (bar == std::string::npos)
              break;
            start = bar + 1;
          }
      };
      if (v.is_array())
        for (const auto& r : v)
          one(r);
      else
        one(v);
      return bits;
    }

    DmaCapability parseCapability(const json& v, const MemoryProfile& profile,
                                  const std::string& where)
    {
      DmaCapability cap;
      if (v.is_array())
        {
          // [peripheral, [rights...], option]
          if (v.size() < 2 or v.size() > 3 or not v[0].is_string())
            throw SchemaError(where + ": expected [peripheral, rights, option]");
          cap.peripheralId = v[0].get<std::string>();
          cap.rights = Rights(parseRights(v[1], where));
          if (v.size() == 3)
            cap.ear = parseEar(v[2], profile, cap.peripheralId, where);
        }
      else if (v.is_object())
        {
          cap.peripheralId = requireString(v, "peripheral", where);
          cap.rights = Rights(parseRights(require(v, "rights", where), where));
          if (v.contains("ear"))
            cap.ear = parseEar(v["ear"], profile, cap.peripheralId, where);
        }
      else
        throw SchemaError(where + ": capability must be an array or object");
      if (cap.rights.empty())
        throw SchemaError(where + ": capability grants no rights");
      return cap;
    }

    UserRegion parseRegion(const json& v, const std::string& where)
    {
      UserRegion r;
      r.range = parse_range(v, where);
      r.permission.privileged = parse_access_level(requireString(v, "priv", where));
      r.permission.unprivileged = parse_access_level(requireString(v, "unpriv", where));
      r.permission.executeNever = optionalBool(v, "xn", true, where);
      return r;
    }

    std::vector<UserRegion> parseRegions(const json& v, const std::string& where)
    {
      if (not v.is_array())
        throw SchemaError(where + ": expected array");
      std::vector<UserRegion> out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(parseRegion(v[i], where + "[" + std::to_string(i) + "]"));
      return out;
    }

    bool toggleOn(const std::map<std::string, bool>& toggles, const std::string& name,
                  const std::string& where)
    {
      auto it = toggles.find(name);
      if (it == toggles.end())
        throw SchemaError(where + ": unknown attack toggle '" + name + "'");
      return it->second;
    }

    std::optional<Action> parseAction(const json& v, const MemoryProfile& profile,
                                      const std::map<std::string, bool>& toggles,
                                      const std::string& where)
    {
      if (not v.is_object())
        throw SchemaError(where + ": expected object");
      if (v.contains("when") and not toggleOn(toggles, requireString(v, "when", where), where))
        return std::nullopt;
      if (v.contains("unless") and toggleOn(toggles, requireString(v, "unless", where), where))
        return std::nullopt;

      Action a;
      a.kind = parse_action_kind(requireString(v, "op", where));
      if (v.contains("label"))
        a.label = v["label"].get<std::string>();
      if (v.contains("at"))
        a.at = Addr(parse_integer(v["at"], where + ".at"));

      auto len = [&](std::uint32_t fallback) {
        return v.contains("len") ? std::uint32_t(parse_integer(v["len"], where + ".len")) : fallback;
      };

      switch (a.kind)
        {
        case ActionKind::MemRead:
        case ActionKind::MemWrite:
        case ActionKind::Exec:
          a.addr = Addr(parse_integer(require(v, "addr", where), where + ".addr"));
          a.length = len(a.kind == ActionKind::Exec ? 2 : 1);
          if (a.length == 0)
            throw SchemaError(where + ": zero-length access");
          if (v.contains("value"))
            a.value = std::uint8_t(parse_integer(v["value"], where + ".value"));
          break;
        case ActionKind::DmaRequest:
          {
            auto& r = a.request;
            r.peripheralId = requireString(v, "peripheral", where);
            r.operation = parse_operation(requireString(v, "operation", where));
            r.buffer = parse_range(require(v, "buffer", where), where + ".buffer");
            if (v.contains("rx_buffer"))
              r.rxBuffer = parse_range(v["rx_buffer"], where + ".rx_buffer");
            if (r.operation == DmaOperation::FullDuplex and not r.rxBuffer)
              throw SchemaError(where + ": FULL_DUPLEX needs rx_buffer");
            if (v.contains("ear"))
              r.ear = parseEar(v["ear"], profile, r.peripheralId, where + ".ear");
            r.label = a.label;
            break;
          }
        case ActionKind::RawDmaConfig:
          {
            auto& w = a.raw;
            w.channel = unsigned(parse_integer(require(v, "channel", where), where + ".channel"));
            w.source = parse_range(require(v, "source", where), where + ".source");
            w.destination = parse_range(require(v, "destination", where), where + ".destination");
            w.length = len(std::min(w.source.size, w.destination.size));
            w.direction = v.contains("direction")
                            ? parse_direction(requireString(v, "direction", where))
                            : TransferDirection::MemToPeriph;
            if (w.channel >= profile.dmaChannels)
              throw SchemaError(where + ": channel beyond dma_channels");
            if (w.length == 0)
              throw SchemaError(where + ": zero-length descriptor");
            break;
          }
        case ActionKind::RedefineRegions:
          a.regions = parseRegions(require(v, "regions", where), where + ".regions");
          break;
        case ActionKind::Syscall:
        case ActionKind::WaitNotify:
        case ActionKind::Nop:
          break;
        }
      return a;
    }

    TaskSpec parseTask(const json& v, const MemoryProfile& profile,
                       const std::map<std::string, bool>& toggles, const std::string& where)
    {
      TaskSpec t;
      t.name = requireString(v, "name", where);
      const std::string at = where + "(" + t.name + ")";
      t.privileged = optionalBool(v, "privileged", false, at);
      t.codeRegion = parse_range(require(v, "code", at), at + ".code");
      t.stackRegion = parse_range(require(v, "stack", at), at + ".stack");
      if (v.contains("regions"))
        t.userRegions = parseRegions(v["regions"], at + ".regions");
      if (v.contains("capabilities"))
        {
          const auto& caps = v["capabilities"];
          if (not caps.is_array())
            throw SchemaError(at + ".capabilities: expected array");
          for (std::size_t i = 0; i < caps.size(); ++i)
            t.capabilities.push_back(
              parseCapability(caps[i], profile, at + ".capabilities[" + std::to_string(i) + "]"));
        }
      if (v.contains("period"))
        t.period = std::uint32_t(parse_integer(v["period"], at + ".period"));
      if (v.contains("behavior"))
        {
          const auto& steps = v["behavior"];
          if (not steps.is_array())
            throw SchemaError(at + ".behavior: expected array");
          for (std::size_t i = 0; i < steps.size(); ++i)
            if (auto a = parseAction(steps[i], profile, toggles,
                                     at + ".behavior[" + std::to_string(i) + "]"))
              t.behavior.push_back(std::move(*a));
        }
      return t;
    }
  }

  Scenario load_scenario(const json& doc, const ScenarioOverrides& overrides)
  {
    if (not doc.is_object())
      throw SchemaError("scenario: expected object");

    Scenario s;
    s.name = doc.contains("name") ? doc["name"].get<std::string>() : std::string("unnamed");
    if (doc.contains("description"))
      s.description = doc["description"].get<std::string>();
    s.ticks = doc.contains("ticks") ? parse_integer(doc["ticks"], "ticks") : 0;
    s.profile = load_profile(doc);

    if (doc.contains("attack_toggles"))
      {
        const auto& tg = doc["attack_toggles"];
        if (not tg.is_object())
          throw SchemaError("attack_toggles: expected object");
        for (const auto& [key, value] : tg.items())
          {
            if (not value.is_boolean())
              throw SchemaError("attack_toggles." + key + ": expected boolean");
            s.attackToggles[key] = value.get<bool>();
          }
      }
    for (const auto& [key, value] : overrides.toggles)
      {
        if (not s.attackToggles.contains(key))
          throw SchemaError("unknown attack toggle '" + key + "'");
        s.attackToggles[key] = value;
      }

    const auto& k = require(doc, "kernel", "scenario");
    auto& L = s.layout;
    L.mode = overrides.mode ? *overrides.mode
                            : parse_mode(doc.contains("mode") ? doc["mode"].get<std::string>()
                                                              : std::string("DBOX"));
    L.syscallsRegion = parse_range(require(k, "syscalls", "kernel"), "kernel.syscalls");
    L.kernelCodeRegion = parse_range(require(k, "code", "kernel"), "kernel.code");
    L.kernelDataRegion = parse_range(require(k, "data", "kernel"), "kernel.data");
    if (k.contains("descriptor_arena"))
      L.descriptorArena = parse_range(k["descriptor_arena"], "kernel.descriptor_arena");
    const auto& dmaTask = require(k, "dma_task", "kernel");
    L.dmaTaskCode = parse_range(require(dmaTask, "code", "kernel.dma_task"), "kernel.dma_task.code");
    L.dmaTaskStack =
      parse_range(require(dmaTask, "stack", "kernel.dma_task"), "kernel.dma_task.stack");
    if (k.contains("canary"))
      {
        const auto& c = k["canary"];
        s.canary = KernelCanary{Addr(parse_integer(require(c, "addr", "kernel.canary"), "canary.addr")),
                                std::uint8_t(parse_integer(require(c, "value", "kernel.canary"),
                                                           "canary.value"))};
        if (not L.kernelDataRegion.containsAddr(s.canary->addr))
          throw ConfigError("kernel.canary must lie in kernel data");
      }
    if (k.contains("request_queue_capacity"))
      s.requestQueueCapacity =
        std::size_t(parse_integer(k["request_queue_capacity"], "kernel.request_queue_capacity"));
    validate_layout(L, s.profile);

    const auto& tasks = require(doc, "tasks", "scenario");
    if (not tasks.is_array())
      throw SchemaError("tasks: expected array");
    bool needsDma = false;
    for (std::size_t i = 0; i < tasks.size(); ++i)
      {
        auto t = parseTask(tasks[i], s.profile, s.attackToggles, "tasks[" + std::to_string(i) + "]");
        needsDma = needsDma or not t.capabilities.empty();
        for (const auto& a : t.behavior)
          needsDma = needsDma or a.kind == ActionKind::RawDmaConfig or
                     a.kind == ActionKind::DmaRequest;
        s.tasks.push_back(std::move(t));
      }
    if (needsDma and s.profile.dmaControllers().empty() and
        s.profile.descriptorHome == DescriptorHome::Mmio)
      throw ConfigError("scenario uses DMA but the profile has no DMA controller");
    return s;
  }

  Scenario load_scenario_file(const std::filesystem::path& path, const ScenarioOverrides& overrides)
  {
    std::ifstream in(path);
    if (not in)
      throw SchemaError("cannot open scenario " + path.string());
    json doc;
    try
      {
        doc = json::parse(in);
      }
    catch (const json::exception& e)
      {
        throw SchemaError(path.string() + ": " + e.what());
      }
    return load_scenario(doc, overrides);
  }

}
