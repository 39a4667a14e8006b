# coding: utf-8

# # A second-screen graph by hand
#
# Two movies, a few widgets hanging off them, shared keywords and three
# viewers. We score everything for one viewer and look at where the numbers
# come from.

from samrec import ContextGraph, asset_relevance, recommend_roots, recommend_widgets

g = ContextGraph()
for name in ("alice", "bob", "carol"):
    g.add_person(name)

g.add_asset("movie1", "root", "Space Saga")
g.add_asset("movie2", "root", "Galactic Wars")
g.add_asset("movie3", "root", "Quiet Harbour")
for widget, root in (("cast1", "movie1"), ("trivia1", "movie1"), ("cast2", "movie2")):
    g.add_asset(widget, "sub")
    g.link_widget(root, widget)

g.tag("movie1", "sci-fi")
g.tag("movie2", "sci-fi")
g.tag("movie3", "drama")


# Alice watched movie1, left a warm comment and liked the cast card.
# She swiped away the trivia widget.

g.interact("alice", "movie1", "consume", timestamp=1)
g.interact("alice", "movie1", "comment", polarity=1.0, intensity=0.8, text="loved it", timestamp=2)
g.interact("alice", "cast1", "like", timestamp=3)
g.interact("alice", "trivia1", "dismiss", timestamp=4)
g.interact("bob", "movie3", "like", timestamp=5)


# ## Where a score comes from
#
# movie1 gets her comment directly plus a share of every neighbour she
# touched. movie2 has no direct signal; it only hears about her through the
# shared sci-fi keyword, one hop further and divided again.

for asset in ("movie1", "movie2", "movie3"):
    b = asset_relevance("alice", asset, g)
    print(f"{asset}: explicit={b.explicit:+.3f} implicit={b.implicit_sum:+.3f} "
          f"indirect={b.indirect_sum:+.4f} total={b.total:+.4f} terms={b.contributing_terms}")


# ## First screen
#
# movie1 is already consumed, so it drops out unless asked for. movie3 has no
# graph path to anything alice did. Nobody who shares her taste rated it
# either, so it gets her mean rating, 0.9, and lands above movie2, whose
# weak graph echo is all it has.

for entry in recommend_roots("alice", g).entries:
    print(entry)

print(recommend_roots("alice", g, include_consumed=True).assets())


# ## Second screen
#
# Widgets of movie1, ranked for the moment she opens it again.

for entry in recommend_widgets("alice", "movie1", g).entries:
    print(entry)


# A new like replaces the old comment rather than stacking on it.

g.interact("alice", "movie1", "like", timestamp=9)
print(g.explicit_interaction("alice", "movie1"))
