#include "bigraph/types.hpp"

namespace bigraph {

const char* to_string(NodeKind k) { return k == NodeKind::User ? "user" : "tweet"; }

const char* to_string(Relation r) {
  switch (r) {
    case Relation::Post: return "post";
    case Relation::Retweet: return "retweet";
    case Relation::Quote: return "quote";
  }
  return "?";
}

Relation relation_from_string(const std::string& s) {
  if (s == "post") return Relation::Post;
  if (s == "retweet") return Relation::Retweet;
  if (s == "quote") return Relation::Quote;
  throw ParseError("unknown relation '" + s + "' (expected post|retweet|quote)");
}

}  // namespace bigraph
