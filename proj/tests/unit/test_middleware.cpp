#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>
#include <sstream>

#include "camflow/error.hpp"
#include "camflow/mw/middleware.hpp"
#include "camflow/mw/wire.hpp"
#include "support/oracles.hpp"

using namespace camflow;
using namespace camflow::mw;

namespace {

SecurityContext ctx(std::initializer_list<Tag> s, std::initializer_list<Tag> i = {}) {
  return SecurityContext(Label(TagKind::secrecy, s), Label(TagKind::integrity, i));
}

std::vector<Tag> tags_of(const SecurityContext& c) {
  std::vector<Tag> t(c.secrecy.begin(), c.secrecy.end());
  t.insert(t.end(), c.integrity.begin(), c.integrity.end());
  return t;
}

template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::invalid_argument;
}

struct World {
  NamingAuthority authority;
  audit::AuditLog log;
  sim::Kernel kernel{authority, log};
  Middleware mw{kernel};
  EntityId proxy_clinic, proxy_lab;
  Tag medical, bob, verified;

  World() {
    kernel.add_machine("clinic");
    kernel.add_machine("lab");
    sim::BootSpec proxy;
    proxy.trusted = true;
    proxy_clinic = kernel.boot_process("clinic", proxy);
    proxy_lab = kernel.boot_process("lab", proxy);
    medical = authority.declare(TagKind::secrecy, "medical");
    bob = authority.declare(TagKind::secrecy, "bob");
    verified = authority.declare(TagKind::integrity, "verified");
    mw.define_schema(MessageSchema("patient", {{"name", std::nullopt}, {"diagnosis", std::nullopt}}));
    mw.define_schema(MessageSchema("lab-result", {{"value", ctx({}, {verified})}}));
  }

  EntityId endpoint(const std::string& machine, SecurityContext c, PrivilegeSets p = {}) {
    sim::BootSpec spec;
    spec.context = c;
    spec.privileges = std::move(p);
    auto id = kernel.boot_process(machine, spec);
    mw.register_endpoint(id, machine == "clinic" ? proxy_clinic : proxy_lab,
                         {id, tags_of(c), ""});
    return id;
  }
};

}  // namespace

TEST_CASE("matching endpoints exchange an intact message") {
  World w;
  auto doctor = w.endpoint("clinic", ctx({w.medical, w.bob}));
  auto specialist = w.endpoint("lab", ctx({w.medical, w.bob}));
  auto conn = w.mw.connect(doctor, specialist);
  REQUIRE(conn.status == ConnectionStatus::established);

  auto msg = make_message(w.mw.schema("patient"), {{"name", "Bob"}, {"diagnosis", "asthma"}});
  msg.find("diagnosis")->label = ctx({w.medical, w.bob});
  auto sent = w.mw.send(doctor, conn.id, msg);
  CHECK(sent.decision.allowed);
  CHECK(sent.stripped.empty());
  auto got = w.mw.receive(specialist, conn.id);
  CHECK(got.message.find("name")->value == "Bob");
  CHECK(got.message.find("diagnosis")->value == "asthma");
  CHECK(got.stripped.empty());
  CHECK(w.kernel.payload(specialist).find("asthma") != std::string::npos);
}

TEST_CASE("a public label on a secret sender is a write-down and is stripped on send") {
  World w;
  auto doctor = w.endpoint("clinic", ctx({w.medical, w.bob}));
  auto specialist = w.endpoint("lab", ctx({w.medical, w.bob}));
  auto conn = w.mw.connect(doctor, specialist);
  auto msg = make_message(w.mw.schema("patient"), {{"name", "Bob"}, {"diagnosis", "asthma"}});
  msg.find("name")->label = ctx({});
  msg.find("diagnosis")->label = ctx({w.medical, w.bob});
  auto sent = w.mw.send(doctor, conn.id, msg);
  CHECK(sent.stripped == std::vector<std::string>{"name"});
  auto got = w.mw.receive(specialist, conn.id);
  CHECK_FALSE(got.message.find("name")->value);
  CHECK(got.message.find("diagnosis")->value == "asthma");
}

TEST_CASE("receive strips attributes the receiver may not see") {
  World w;
  PrivilegeSets privs;
  privs.add_secrecy = TagSet(TagKind::secrecy, {w.medical, w.bob});
  auto desk = w.endpoint("clinic", ctx({}), privs);
  auto board = w.endpoint("lab", ctx({}));
  auto conn = w.mw.connect(desk, board);
  REQUIRE(conn.status == ConnectionStatus::established);

  auto msg = make_message(w.mw.schema("patient"), {{"name", "Bob"}, {"diagnosis", "asthma"}});
  msg = w.mw.label_attribute(desk, msg, "diagnosis", ctx({w.medical, w.bob}));
  auto sent = w.mw.send(desk, conn.id, msg);
  CHECK(sent.stripped.empty());
  auto before = w.log.size();
  auto got = w.mw.receive(board, conn.id);
  CHECK(got.message.find("name")->value == "Bob");
  REQUIRE(got.message.find("diagnosis") != nullptr);
  CHECK_FALSE(got.message.find("diagnosis")->value);
  CHECK(got.stripped == std::vector<std::string>{"diagnosis"});
  CHECK(w.kernel.payload(board).find("asthma") == std::string::npos);

  auto events = w.log.snapshot();
  std::size_t strips = 0;
  for (std::size_t k = before; k < events.size(); ++k) {
    if (events[k].meta("op") == "strip") {
      ++strips;
      CHECK_FALSE(events[k].allowed);
      CHECK(events[k].meta("attr") == "diagnosis");
    }
  }
  CHECK(strips == 1);
}

TEST_CASE("attributes whose integrity the sender lacks are nulled before propagation") {
  World w;
  auto tech = w.endpoint("clinic", ctx({}));
  auto lab = w.endpoint("lab", ctx({}));
  auto conn = w.mw.connect(tech, lab);
  auto msg = make_message(w.mw.schema("lab-result"), {{"value", "42"}});
  CHECK(msg.find("value")->label == ctx({}, {w.verified}));
  auto sent = w.mw.send(tech, conn.id, msg);
  CHECK(sent.stripped == std::vector<std::string>{"value"});
  auto got = w.mw.receive(lab, conn.id);
  CHECK_FALSE(got.message.find("value")->value);
  CHECK(got.stripped.empty());
}

TEST_CASE("attribute labelling rules") {
  World w;
  Tag t = w.authority.declare(TagKind::secrecy, "t");
  PrivilegeSets privs;
  privs.add_secrecy.insert(t);
  auto producer = w.endpoint("clinic", ctx({}), privs);
  auto plain = w.endpoint("clinic", ctx({}));
  auto msg = make_message(w.mw.schema("patient"), {{"name", "x"}});
  auto labelled = w.mw.label_attribute(producer, msg, "name", ctx({t}));
  CHECK(labelled.find("name")->label == ctx({t}));
  CHECK(error_of([&] { w.mw.label_attribute(plain, msg, "name", ctx({t})); }) ==
        Errc::missing_privilege);
  auto fixed = make_message(w.mw.schema("lab-result"), {{"value", "1"}});
  CHECK(error_of([&] { w.mw.label_attribute(producer, fixed, "value", ctx({})); }) ==
        Errc::fixed_label);
  CHECK(error_of([&] { w.mw.label_attribute(producer, msg, "nope", ctx({})); }) ==
        Errc::schema_violation);

  auto forged = fixed;
  forged.find("value")->label = ctx({});
  CHECK(error_of([&] { conform(w.mw.schema("lab-result"), forged); }) == Errc::fixed_label);
}

TEST_CASE("schemas reject duplicates and unknown attributes") {
  CHECK(error_of([] { MessageSchema("s", {{"a", std::nullopt}, {"a", std::nullopt}}); }) ==
        Errc::schema_violation);
  CHECK(error_of([] { MessageSchema("", {}); }) == Errc::schema_violation);
  MessageSchema s("s", {{"a", std::nullopt}, {"b", std::nullopt}});
  CHECK(error_of([&] { make_message(s, {{"c", "1"}}); }) == Errc::schema_violation);
  CHECK(error_of([&] { make_message(s, {{"a", "1"}, {"a", "2"}}); }) == Errc::schema_violation);
  auto m = make_message(s, {{"b", "2"}});
  REQUIRE(m.attributes.size() == 2);
  CHECK(m.attributes[0].name == "a");
  CHECK_FALSE(m.attributes[0].value);
}

TEST_CASE("connection refusals") {
  World w;
  auto doctor = w.endpoint("clinic", ctx({w.medical, w.bob}));
  auto board = w.endpoint("lab", ctx({}));

  auto down = w.mw.connect(doctor, board);
  CHECK(down.status == ConnectionStatus::refused);
  CHECK(down.decision.reason == "secrecy");
  CHECK(w.log.snapshot().back().allowed == false);
  auto msg = make_message(w.mw.schema("patient"), {{"name", "Bob"}});
  CHECK(error_of([&] { w.mw.send(doctor, down.id, msg); }) == Errc::not_established);
  CHECK(w.mw.pending(board, down.id) == 0);

  auto up = w.mw.connect(board, doctor);
  CHECK(up.status == ConnectionStatus::established);
  CHECK(w.mw.connect(board, doctor, true).status == ConnectionStatus::refused);

  sim::BootSpec liar_spec;
  auto liar = w.kernel.boot_process("lab", liar_spec);
  w.mw.register_endpoint(liar, w.proxy_lab, {liar, {w.medical}, ""});
  auto lied = w.mw.connect(board, liar);
  CHECK(lied.status == ConnectionStatus::refused);
  CHECK(lied.decision.reason == "assertion-mismatch");
  CHECK(lied.decision.offending == std::vector<Tag>{w.medical});

  auto picky = w.endpoint("lab", ctx({}));
  w.mw.register_endpoint(picky, w.proxy_lab, {picky, {}, ""},
                         [](const EntityId&, const EntityId&, const SecurityContext&) { return false; });
  CHECK(w.mw.connect(board, picky).decision.reason == "access-policy");

  CHECK(error_of([&] { w.mw.connect(board, w.proxy_lab); }) == Errc::unknown_endpoint);
}

TEST_CASE("registration checks the proxy and the asserted tags") {
  World w;
  sim::BootSpec spec;
  auto p = w.kernel.boot_process("clinic", spec);
  auto untrusted = w.kernel.boot_process("clinic", spec);
  CHECK(error_of([&] { w.mw.register_endpoint(p, untrusted, {p, {}, ""}); }) ==
        Errc::untrusted_actor);
  CHECK(error_of([&] { w.mw.register_endpoint(p, w.proxy_lab, {p, {}, ""}); }) ==
        Errc::cross_machine);
  CHECK(error_of([&] {
          w.mw.register_endpoint(p, w.proxy_clinic, {p, {Tag{999, TagKind::secrecy}}, ""});
        }) == Errc::unknown_tag);
  auto file = w.kernel.boot_object("clinic", sim::EntityClass::file, spec);
  CHECK(error_of([&] { w.mw.register_endpoint(file, w.proxy_clinic, {file, {}, ""}); }) ==
        Errc::passive_entity);
}

TEST_CASE("queues are FIFO and only endpoints may use them") {
  World w;
  auto a = w.endpoint("clinic", ctx({}));
  auto b = w.endpoint("lab", ctx({}));
  auto c = w.endpoint("lab", ctx({}));
  auto conn = w.mw.connect(a, b);
  const auto& schema = w.mw.schema("patient");
  for (const char* v : {"1", "2", "3"}) w.mw.send(a, conn.id, make_message(schema, {{"name", v}}));
  CHECK(w.mw.pending(b, conn.id) == 3);
  CHECK(w.mw.receive(b, conn.id).message.find("name")->value == "1");
  CHECK(w.mw.receive(b, conn.id).message.find("name")->value == "2");
  CHECK(w.mw.receive(b, conn.id).message.find("name")->value == "3");
  CHECK(error_of([&] { w.mw.receive(b, conn.id); }) == Errc::empty_queue);
  CHECK(error_of([&] { w.mw.send(b, conn.id, make_message(schema, {})); }) == Errc::not_endpoint);
  CHECK(error_of([&] { w.mw.receive(c, conn.id); }) == Errc::not_endpoint);

  auto both = w.mw.connect(a, b, true);
  w.mw.send(b, both.id, make_message(schema, {{"name", "back"}}));
  CHECK(w.mw.receive(a, both.id).message.find("name")->value == "back");
}

TEST_CASE("a fully stripped message is still delivered") {
  World w;
  PrivilegeSets privs;
  privs.add_secrecy = TagSet(TagKind::secrecy, {w.medical});
  auto a = w.endpoint("clinic", ctx({}), privs);
  auto b = w.endpoint("lab", ctx({}));
  auto conn = w.mw.connect(a, b);
  auto msg = make_message(w.mw.schema("patient"), {{"name", "n"}, {"diagnosis", "d"}});
  msg = w.mw.label_attribute(a, msg, "name", ctx({w.medical}));
  msg = w.mw.label_attribute(a, msg, "diagnosis", ctx({w.medical}));
  w.mw.send(a, conn.id, msg);
  auto got = w.mw.receive(b, conn.id);
  CHECK(got.message.attributes.size() == 2);
  CHECK_FALSE(got.message.attributes[0].value);
  CHECK_FALSE(got.message.attributes[1].value);
}

TEST_CASE("stripping is sound and idempotent on random inputs") {
  std::mt19937_64 rng(5);
  const std::vector<std::uint64_t> s_ids{1, 2, 3}, i_ids{4, 5};
  auto random_ctx = [&](double p) {
    return SecurityContext(oracle::random_set(rng, TagKind::secrecy, s_ids, p),
                           oracle::random_set(rng, TagKind::integrity, i_ids, p));
  };
  for (int n = 0; n < 2000; ++n) {
    auto sender = random_ctx(0.3);
    auto receiver = random_ctx(0.3);
    Message msg{"s", {}};
    for (int k = 0; k < 4; ++k) {
      Attribute a{"a" + std::to_string(k), std::string("v"), std::nullopt};
      if (rng() % 3) a.label = random_ctx(0.4);
      if (rng() % 7 == 0) a.value.reset();
      msg.attributes.push_back(a);
    }
    // Either order of the two passes ends in the same delivered values.
    auto sent = strip_attributes(msg, sender, StripSide::send, sender).message;
    auto got = strip_attributes(sent, receiver, StripSide::receive, sender).message;
    auto other = strip_attributes(strip_attributes(msg, receiver, StripSide::receive, sender).message,
                                  sender, StripSide::send, sender)
                     .message;
    CHECK(got == other);
    for (const auto& a : got.attributes) {
      if (!a.value) continue;
      CHECK(oracle::flow(a.label ? *a.label : sender, receiver));
      if (a.label) CHECK(oracle::flow(sender, *a.label));
    }
    auto again = strip_attributes(got, receiver, StripSide::receive, sender);
    CHECK(again.message == got);
    CHECK(again.stripped.empty());
  }
}

TEST_CASE("wire format matches the golden file") {
  std::ifstream in(std::string(CAMFLOW_GOLDEN_DIR) + "/patient.wire", std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string golden = buf.str();

  Message patient{"patient",
                  {{"name", std::string("Bob"), std::nullopt},
                   {"diagnosis", std::string("flu"),
                    ctx({Tag{1, TagKind::secrecy}, Tag{2, TagKind::secrecy}})},
                   {"note", std::nullopt, ctx({}, {Tag{7, TagKind::integrity}})},
                   {"extra", std::nullopt, std::nullopt}}};
  Message empty{"empty", {}};
  CHECK(encode_messages({patient, empty}) == golden);
  auto decoded = decode_messages(golden);
  REQUIRE(decoded.size() == 2);
  CHECK(decoded[0] == patient);
  CHECK(decoded[1] == empty);
  CHECK(decode_message(encode_message(patient)) == patient);
}

TEST_CASE("malformed wire records are rejected") {
  Message m{"s", {{"a", std::string("v"), ctx({Tag{3, TagKind::secrecy}})}}};
  auto bytes = encode_message(m);
  CHECK(error_of([&] { decode_message(bytes.substr(0, bytes.size() - 1)); }) ==
        Errc::malformed_record);
  CHECK(error_of([&] { decode_message(bytes + bytes); }) == Errc::malformed_record);
  CHECK(error_of([&] { decode_message(""); }) == Errc::malformed_record);

  auto bad_flags = bytes;
  // length(4) + schema(4+1) + count(4) + name(4+1) = offset of the flags byte
  bad_flags[18] = 0x04;
  CHECK(error_of([&] { decode_message(bad_flags); }) == Errc::malformed_record);

  auto unlabelled_tags = bytes;
  unlabelled_tags[18] = 0x01;
  CHECK(error_of([&] { decode_message(unlabelled_tags); }) == Errc::malformed_record);

  auto padded = bytes;
  padded[0] = static_cast<char>(padded[0] + 1);
  padded.push_back('\0');
  CHECK(error_of([&] { decode_message(padded); }) == Errc::malformed_record);
}

TEST_CASE("random messages survive the wire round trip") {
  std::mt19937_64 rng(6);
  for (int n = 0; n < 500; ++n) {
    Message m{"schema-" + std::to_string(n), {}};
    int count = rng() % 6;
    for (int k = 0; k < count; ++k) {
      Attribute a{"attr" + std::to_string(k), std::nullopt, std::nullopt};
      if (rng() % 2) a.value = std::string(rng() % 20, static_cast<char>(rng() % 256));
      if (rng() % 2) {
        a.label = SecurityContext(
            oracle::random_set(rng, TagKind::secrecy, {1, 2, 1ull << 40}, 0.5),
            oracle::random_set(rng, TagKind::integrity, {3, 4}, 0.5));
      }
      m.attributes.push_back(a);
    }
    CHECK(decode_message(encode_message(m)) == m);
  }
}
