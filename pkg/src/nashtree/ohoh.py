"""Open-handed two-player "Oh Hell!" deals and their game trees.

Both players see both hands. Each is dealt k cards from one standard
pack and a trump suit is chosen. Player 1 declares a contract (a trick
count, 0..k), then player 2 declares any contract except the one that
would make the two contracts sum to k, so at least one player must miss.
The button (player 1 at first) leads any card; the opponent must follow
the led suit when possible; the trick goes to the higher card of the led
suit unless trumped, and the winner leads next. Meeting your contract
pays 10 plus the contract; missing it pays minus (10 plus the contract)
in "mirror" scoring or a flat -10 in "flat" scoring.

Deals are a deterministic function of (config, seed): a Mersenne Twister
(`random.Random(seed)`) picks the trump via `randrange(4)` and then deals
2k cards by a partial Fisher-Yates shuffle over the suit-major deck using
`randrange(i, 52)`. Golden deal files in the test suite pin this choice.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

from .gametree import GameTree, GtreeParseError, Internal, Leaf, PayoffVector

SUITS = "CDHS"
RANKS = range(2, 15)  # 14 is the ace; deuce is lowest
RANK_CHARS = "23456789TJQKA"
MISS_PENALTY_MODES = ("mirror", "flat")


class Card(NamedTuple):
    rank: int
    suit: str


def card_token(card: Card) -> str:
    return RANK_CHARS[card.rank - 2] + card.suit


def parse_card(token: str) -> Card:
    if len(token) != 2 or token[0] not in RANK_CHARS or token[1] not in SUITS:
        raise ValueError(f"malformed card token {token!r}")
    return Card(RANK_CHARS.index(token[0]) + 2, token[1])


def _card_key(card: Card) -> tuple[int, int]:
    return (SUITS.index(card.suit), card.rank)


DECK = tuple(Card(rank, suit) for suit in SUITS for rank in RANKS)


@dataclass(frozen=True)
class OhohConfig:
    cards_per_player: int
    miss_penalty: str = "mirror"

    def __post_init__(self):
        if not 1 <= self.cards_per_player <= 7:
            raise ValueError("cards per player must be between 1 and 7")
        if self.miss_penalty not in MISS_PENALTY_MODES:
            raise ValueError(f"miss penalty must be one of {MISS_PENALTY_MODES}")


@dataclass(frozen=True)
class Deal:
    seed: int
    trump: str
    hand1: tuple[Card, ...]
    hand2: tuple[Card, ...]


def deal(config: OhohConfig, seed: int) -> Deal:
    """Deterministic deal for a seed; see the module docstring for the RNG."""
    rng = random.Random(seed)
    trump = SUITS[rng.randrange(4)]
    k = config.cards_per_player
    deck = list(DECK)
    for i in range(2 * k):
        j = rng.randrange(i, 52)
        deck[i], deck[j] = deck[j], deck[i]
    hand1 = tuple(sorted(deck[:k], key=_card_key))
    hand2 = tuple(sorted(deck[k : 2 * k], key=_card_key))
    return Deal(seed=seed, trump=trump, hand1=hand1, hand2=hand2)


def legal_cards(hand: Iterable[Card], led_suit: str | None) -> tuple[Card, ...]:
    """The leader may play anything; a follower must follow suit if able."""
    cards = tuple(hand)
    if led_suit is None:
        return cards
    following = tuple(c for c in cards if c.suit == led_suit)
    return following or cards


def trick_winner(button_card: Card, reply_card: Card, trump: str) -> bool:
    """True if the button's (led) card wins the trick.

    Same suit: higher rank wins. Otherwise a lone trump wins; with no
    trump involved, the led suit wins by default.
    """
    if button_card.suit == reply_card.suit:
        return button_card.rank > reply_card.rank
    if reply_card.suit == trump:
        return False
    return True


def score(contract: int, tricks_won: int, mode: str = "mirror") -> int:
    """Payoff for one player given her contract and actual tricks."""
    if tricks_won == contract:
        return 10 + contract
    if mode == "mirror":
        return -(10 + contract)
    if mode == "flat":
        return -10
    raise ValueError(f"miss penalty must be one of {MISS_PENALTY_MODES}")


def build_tree(deal_: Deal, config: OhohConfig) -> GameTree:
    """The full game tree of a deal.

    Player 1 picks a contract (k+1 children), player 2 picks any contract
    whose sum with it differs from k, then 2k card plays alternate between
    the current button and the opponent. Forced plays (a single legal
    card) still get a node, so every root-to-leaf path has 2 + 2k
    decisions; binarize() splices those pass-through nodes before solving.
    Node ids are assigned in preorder; children are ordered by ascending
    contract and by (suit C<D<H<S, then rank) for cards.
    """
    k = config.cards_per_player
    if len(deal_.hand1) != k or len(deal_.hand2) != k:
        raise ValueError("deal does not match the configured hand size")
    trump = deal_.trump
    mode = config.miss_penalty
    nodes: dict[int, Internal | Leaf] = {}
    counter = itertools.count(1)
    payoff_cache: dict[tuple[int, int], PayoffVector] = {}

    def leaf(contract1: int, contract2: int, tricks1: int) -> int:
        s1 = score(contract1, tricks1, mode)
        s2 = score(contract2, k - tricks1, mode)
        payoff = payoff_cache.get((s1, s2))
        if payoff is None:
            payoff = PayoffVector(Fraction(s1), Fraction(s2))
            payoff_cache[(s1, s2)] = payoff
        nid = next(counter)
        nodes[nid] = Leaf(payoff)
        return nid

    def lead(c1: int, c2: int, button: int, hands: tuple, tricks1: int) -> int:
        hand = hands[button - 1]
        if not hand:
            return leaf(c1, c2, tricks1)
        nid = next(counter)
        children = []
        for card in hand:
            rest = tuple(c for c in hand if c != card)
            rest_hands = (rest, hands[1]) if button == 1 else (hands[0], rest)
            children.append(reply(c1, c2, button, card, rest_hands, tricks1))
        nodes[nid] = Internal(button, tuple(children))
        return nid

    def reply(
        c1: int, c2: int, button: int, led: Card, hands: tuple, tricks1: int
    ) -> int:
        opponent = 3 - button
        hand = hands[opponent - 1]
        nid = next(counter)
        children = []
        for card in legal_cards(hand, led.suit):
            rest = tuple(c for c in hand if c != card)
            rest_hands = (rest, hands[1]) if opponent == 1 else (hands[0], rest)
            winner = button if trick_winner(led, card, trump) else opponent
            children.append(
                lead(c1, c2, winner, rest_hands, tricks1 + (1 if winner == 1 else 0))
            )
        nodes[nid] = Internal(opponent, tuple(children))
        return nid

    root = next(counter)
    contract1_children = []
    for c1 in range(k + 1):
        bid2 = next(counter)
        bid2_children = [
            lead(c1, c2, 1, (deal_.hand1, deal_.hand2), 0)
            for c2 in range(k + 1)
            if c1 + c2 != k
        ]
        nodes[bid2] = Internal(2, tuple(bid2_children))
        contract1_children.append(bid2)
    nodes[root] = Internal(1, tuple(contract1_children))
    return GameTree(root, nodes)


# -- deal text format -----------------------------------------------------------


def serialize_deal(deal_: Deal) -> str:
    lines = [
        "deal v1",
        f"seed {deal_.seed}",
        f"trump {deal_.trump}",
        "hand 1 " + " ".join(card_token(c) for c in deal_.hand1),
        "hand 2 " + " ".join(card_token(c) for c in deal_.hand2),
    ]
    return "\n".join(lines) + "\n"


def parse_deal(text: str) -> Deal:
    seed = trump = hand1 = hand2 = None
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        word = tokens[0]
        try:
            if not seen_header:
                if word != "deal" or tokens[1:] != ["v1"]:
                    raise ValueError("expected header 'deal v1'")
                seen_header = True
            elif word == "seed":
                seed = int(tokens[1])
            elif word == "trump":
                if tokens[1] not in SUITS:
                    raise ValueError(f"unknown suit {tokens[1]!r}")
                trump = tokens[1]
            elif word == "hand":
                cards = tuple(parse_card(t) for t in tokens[2:])
                if tokens[1] == "1":
                    hand1 = cards
                elif tokens[1] == "2":
                    hand2 = cards
                else:
                    raise ValueError("hand index must be 1 or 2")
            else:
                raise ValueError(f"unknown directive {word!r}")
        except (IndexError, ValueError) as exc:
            raise GtreeParseError(str(exc), lineno) from None
    if seed is None or trump is None or hand1 is None or hand2 is None:
        raise GtreeParseError("incomplete deal (need seed, trump, both hands)", 1)
    return Deal(seed=seed, trump=trump, hand1=hand1, hand2=hand2)
