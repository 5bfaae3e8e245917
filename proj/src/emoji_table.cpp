#include "pqlm/textprep.hpp"

namespace pqlm {

namespace {

struct EmojiEntry {
  const char* bytes; // UTF-8, base codepoint only (no U+FE0F)
  const char* name;
};

// Descriptors follow CLDR short names, snake_cased. Base codepoints only;
// a variation selector after a matched emoji is consumed by clean().
const EmojiEntry kEmojiEntries[] = {
    // faces
    {"\U0001F600", "grinning_face"},
    {"\U0001F603", "grinning_face_with_big_eyes"},
    {"\U0001F604", "grinning_face_with_smiling_eyes"},
    {"\U0001F601", "beaming_face_with_smiling_eyes"},
    {"\U0001F606", "grinning_squinting_face"},
    {"\U0001F605", "grinning_face_with_sweat"},
    {"\U0001F923", "rolling_on_the_floor_laughing"},
    {"\U0001F602", "face_with_tears_of_joy"},
    {"\U0001F642", "slightly_smiling_face"},
    {"\U0001F643", "upside_down_face"},
    {"\U0001F609", "winking_face"},
    {"\U0001F60A", "smiling_face_with_smiling_eyes"},
    {"\U0001F607", "smiling_face_with_halo"},
    {"\U0001F970", "smiling_face_with_hearts"},
    {"\U0001F60D", "smiling_face_with_heart_eyes"},
    {"\U0001F929", "star_struck"},
    {"\U0001F618", "face_blowing_a_kiss"},
    {"\U0001F617", "kissing_face"},
    {"☺", "smiling_face"},
    {"\U0001F61A", "kissing_face_with_closed_eyes"},
    {"\U0001F619", "kissing_face_with_smiling_eyes"},
    {"\U0001F60B", "face_savoring_food"},
    {"\U0001F61B", "face_with_tongue"},
    {"\U0001F61C", "winking_face_with_tongue"},
    {"\U0001F92A", "zany_face"},
    {"\U0001F61D", "squinting_face_with_tongue"},
    {"\U0001F911", "money_mouth_face"},
    {"\U0001F917", "smiling_face_with_open_hands"},
    {"\U0001F92D", "face_with_hand_over_mouth"},
    {"\U0001F92B", "shushing_face"},
    {"\U0001F914", "thinking_face"},
    {"\U0001F910", "zipper_mouth_face"},
    {"\U0001F928", "face_with_raised_eyebrow"},
    {"\U0001F610", "neutral_face"},
    {"\U0001F611", "expressionless_face"},
    {"\U0001F636", "face_without_mouth"},
    {"\U0001F60F", "smirking_face"},
    {"\U0001F612", "unamused_face"},
    {"\U0001F644", "face_with_rolling_eyes"},
    {"\U0001F62C", "grimacing_face"},
    {"\U0001F925", "lying_face"},
    {"\U0001F60C", "relieved_face"},
    {"\U0001F614", "pensive_face"},
    {"\U0001F62A", "sleepy_face"},
    {"\U0001F924", "drooling_face"},
    {"\U0001F634", "sleeping_face"},
    {"\U0001F637", "face_with_medical_mask"},
    {"\U0001F912", "face_with_thermometer"},
    {"\U0001F915", "face_with_head_bandage"},
    {"\U0001F922", "nauseated_face"},
    {"\U0001F92E", "face_vomiting"},
    {"\U0001F927", "sneezing_face"},
    {"\U0001F975", "hot_face"},
    {"\U0001F976", "cold_face"},
    {"\U0001F974", "woozy_face"},
    {"\U0001F635", "dizzy_face"},
    {"\U0001F92F", "exploding_head"},
    {"\U0001F920", "cowboy_hat_face"},
    {"\U0001F973", "partying_face"},
    {"\U0001F60E", "smiling_face_with_sunglasses"},
    {"\U0001F913", "nerd_face"},
    {"\U0001F9D0", "face_with_monocle"},
    {"\U0001F615", "confused_face"},
    {"\U0001F61F", "worried_face"},
    {"\U0001F641", "slightly_frowning_face"},
    {"☹", "frowning_face"},
    {"\U0001F62E", "face_with_open_mouth"},
    {"\U0001F62F", "hushed_face"},
    {"\U0001F632", "astonished_face"},
    {"\U0001F633", "flushed_face"},
    {"\U0001F97A", "pleading_face"},
    {"\U0001F626", "frowning_face_with_open_mouth"},
    {"\U0001F627", "anguished_face"},
    {"\U0001F628", "fearful_face"},
    {"\U0001F630", "anxious_face_with_sweat"},
    {"\U0001F625", "sad_but_relieved_face"},
    {"\U0001F622", "crying_face"},
    {"\U0001F62D", "loudly_crying_face"},
    {"\U0001F631", "face_screaming_in_fear"},
    {"\U0001F616", "confounded_face"},
    {"\U0001F623", "persevering_face"},
    {"\U0001F61E", "disappointed_face"},
    {"\U0001F613", "downcast_face_with_sweat"},
    {"\U0001F629", "weary_face"},
    {"\U0001F62B", "tired_face"},
    {"\U0001F971", "yawning_face"},
    {"\U0001F624", "face_with_steam_from_nose"},
    {"\U0001F621", "pouting_face"},
    {"\U0001F620", "angry_face"},
    {"\U0001F92C", "face_with_symbols_on_mouth"},
    {"\U0001F608", "smiling_face_with_horns"},
    {"\U0001F47F", "angry_face_with_horns"},
    {"\U0001F480", "skull"},
    {"☠", "skull_and_crossbones"},
    {"\U0001F4A9", "pile_of_poo"},
    {"\U0001F921", "clown_face"},
    {"\U0001F479", "ogre"},
    {"\U0001F47A", "goblin"},
    {"\U0001F47B", "ghost"},
    {"\U0001F47D", "alien"},
    {"\U0001F47E", "alien_monster"},
    {"\U0001F916", "robot"},
    {"\U0001F63A", "grinning_cat"},
    {"\U0001F638", "grinning_cat_with_smiling_eyes"},
    {"\U0001F639", "cat_with_tears_of_joy"},
    {"\U0001F63B", "smiling_cat_with_heart_eyes"},
    {"\U0001F63C", "cat_with_wry_smile"},
    {"\U0001F63D", "kissing_cat"},
    {"\U0001F640", "weary_cat"},
    {"\U0001F63F", "crying_cat"},
    {"\U0001F63E", "pouting_cat"},
    {"\U0001F648", "see_no_evil_monkey"},
    {"\U0001F649", "hear_no_evil_monkey"},
    {"\U0001F64A", "speak_no_evil_monkey"},
    // hearts
    {"\U0001F48B", "kiss_mark"},
    {"\U0001F498", "heart_with_arrow"},
    {"\U0001F49D", "heart_with_ribbon"},
    {"\U0001F496", "sparkling_heart"},
    {"\U0001F497", "growing_heart"},
    {"\U0001F493", "beating_heart"},
    {"\U0001F49E", "revolving_hearts"},
    {"\U0001F495", "two_hearts"},
    {"❣", "heart_exclamation"},
    {"\U0001F494", "broken_heart"},
    {"❤", "red_heart"},
    {"\U0001F9E1", "orange_heart"},
    {"\U0001F49B", "yellow_heart"},
    {"\U0001F49A", "green_heart"},
    {"\U0001F499", "blue_heart"},
    {"\U0001F49C", "purple_heart"},
    {"\U0001F90E", "brown_heart"},
    {"\U0001F5A4", "black_heart"},
    {"\U0001F90D", "white_heart"},
    // marks
    {"\U0001F4AF", "hundred_points"},
    {"\U0001F4A2", "anger_symbol"},
    {"\U0001F4A5", "collision"},
    {"\U0001F4AB", "dizzy"},
    {"\U0001F4A6", "sweat_droplets"},
    {"\U0001F4A8", "dashing_away"},
    {"\U0001F4A3", "bomb"},
    {"\U0001F4AC", "speech_balloon"},
    {"\U0001F4A4", "zzz"},
    // hands
    {"\U0001F44B", "waving_hand"},
    {"\U0001F91A", "raised_back_of_hand"},
    {"✋", "raised_hand"},
    {"\U0001F596", "vulcan_salute"},
    {"\U0001F44C", "ok_hand"},
    {"\U0001F90F", "pinching_hand"},
    {"✌", "victory_hand"},
    {"\U0001F91E", "crossed_fingers"},
    {"\U0001F91F", "love_you_gesture"},
    {"\U0001F918", "sign_of_the_horns"},
    {"\U0001F919", "call_me_hand"},
    {"\U0001F448", "backhand_index_pointing_left"},
    {"\U0001F449", "backhand_index_pointing_right"},
    {"\U0001F446", "backhand_index_pointing_up"},
    {"\U0001F595", "middle_finger"},
    {"\U0001F447", "backhand_index_pointing_down"},
    {"☝", "index_pointing_up"},
    {"\U0001F44D", "thumbs_up"},
    {"\U0001F44E", "thumbs_down"},
    {"✊", "raised_fist"},
    {"\U0001F44A", "oncoming_fist"},
    {"\U0001F91B", "left_facing_fist"},
    {"\U0001F91C", "right_facing_fist"},
    {"\U0001F44F", "clapping_hands"},
    {"\U0001F64C", "raising_hands"},
    {"\U0001F450", "open_hands"},
    {"\U0001F932", "palms_up_together"},
    {"\U0001F91D", "handshake"},
    {"\U0001F64F", "folded_hands"},
    {"✍", "writing_hand"},
    {"\U0001F4AA", "flexed_biceps"},
    {"\U0001F440", "eyes"},
    {"\U0001F9E0", "brain"},
    // nature
    {"\U0001F525", "fire"},
    {"⭐", "star"},
    {"\U0001F31F", "glowing_star"},
    {"✨", "sparkles"},
    {"⚡", "high_voltage"},
    {"☀", "sun"},
    {"\U0001F308", "rainbow"},
    {"☁", "cloud"},
    {"❄", "snowflake"},
    {"\U0001F4A7", "droplet"},
    {"\U0001F30A", "water_wave"},
    {"\U0001F331", "seedling"},
    {"\U0001F33B", "sunflower"},
    {"\U0001F339", "rose"},
    {"\U0001F338", "cherry_blossom"},
    {"\U0001F333", "deciduous_tree"},
    {"\U0001F334", "palm_tree"},
    {"\U0001F319", "crescent_moon"},
    {"\U0001F30D", "globe_showing_europe_africa"},
    // animals
    {"\U0001F436", "dog_face"},
    {"\U0001F431", "cat_face"},
    {"\U0001F42D", "mouse_face"},
    {"\U0001F430", "rabbit_face"},
    {"\U0001F98A", "fox"},
    {"\U0001F43B", "bear"},
    {"\U0001F43C", "panda"},
    {"\U0001F428", "koala"},
    {"\U0001F42F", "tiger_face"},
    {"\U0001F981", "lion"},
    {"\U0001F437", "pig_face"},
    {"\U0001F438", "frog"},
    {"\U0001F435", "monkey_face"},
    {"\U0001F414", "chicken"},
    {"\U0001F427", "penguin"},
    {"\U0001F426", "bird"},
    {"\U0001F985", "eagle"},
    {"\U0001F986", "duck"},
    {"\U0001F989", "owl"},
    {"\U0001F40D", "snake"},
    {"\U0001F422", "turtle"},
    {"\U0001F41F", "fish"},
    {"\U0001F42C", "dolphin"},
    {"\U0001F433", "spouting_whale"},
    {"\U0001F98B", "butterfly"},
    {"\U0001F41D", "honeybee"},
    {"\U0001F984", "unicorn"},
    {"\U0001F434", "horse_face"},
    // food
    {"\U0001F34E", "red_apple"},
    {"\U0001F34C", "banana"},
    {"\U0001F349", "watermelon"},
    {"\U0001F347", "grapes"},
    {"\U0001F353", "strawberry"},
    {"\U0001F34B", "lemon"},
    {"\U0001F351", "peach"},
    {"\U0001F355", "pizza"},
    {"\U0001F354", "hamburger"},
    {"\U0001F35F", "french_fries"},
    {"\U0001F32E", "taco"},
    {"\U0001F363", "sushi"},
    {"\U0001F366", "soft_ice_cream"},
    {"\U0001F370", "shortcake"},
    {"\U0001F382", "birthday_cake"},
    {"\U0001F36B", "chocolate_bar"},
    {"\U0001F37F", "popcorn"},
    {"☕", "hot_beverage"},
    {"\U0001F37A", "beer_mug"},
    {"\U0001F377", "wine_glass"},
    {"\U0001F378", "cocktail_glass"},
    // activities
    {"\U0001F389", "party_popper"},
    {"\U0001F38A", "confetti_ball"},
    {"\U0001F381", "wrapped_gift"},
    {"\U0001F3C6", "trophy"},
    {"\U0001F947", "first_place_medal"},
    {"⚽", "soccer_ball"},
    {"\U0001F3C0", "basketball"},
    {"\U0001F3C8", "american_football"},
    {"⚾", "baseball"},
    {"\U0001F3BE", "tennis"},
    {"\U0001F3AE", "video_game"},
    {"\U0001F3B5", "musical_note"},
    {"\U0001F3B6", "musical_notes"},
    {"\U0001F3A4", "microphone"},
    {"\U0001F3A7", "headphone"},
    {"\U0001F3B8", "guitar"},
    {"\U0001F3AC", "clapper_board"},
    {"\U0001F3A8", "artist_palette"},
    {"\U0001F3AF", "direct_hit"},
    // travel
    {"\U0001F680", "rocket"},
    {"✈", "airplane"},
    {"\U0001F697", "automobile"},
    {"\U0001F695", "taxi"},
    {"\U0001F68C", "bus"},
    {"\U0001F682", "locomotive"},
    {"\U0001F6B2", "bicycle"},
    {"⛵", "sailboat"},
    {"\U0001F3E0", "house"},
    {"\U0001F3E2", "office_building"},
    // objects
    {"⌚", "watch"},
    {"⏰", "alarm_clock"},
    {"\U0001F4F1", "mobile_phone"},
    {"\U0001F4BB", "laptop"},
    {"\U0001F4F7", "camera"},
    {"\U0001F4FA", "television"},
    {"\U0001F4E7", "e_mail"},
    {"✉", "envelope"},
    {"\U0001F4DD", "memo"},
    {"\U0001F4DA", "books"},
    {"\U0001F4D6", "open_book"},
    {"\U0001F4B0", "money_bag"},
    {"\U0001F4B5", "dollar_banknote"},
    {"\U0001F4B8", "money_with_wings"},
    {"\U0001F4A1", "light_bulb"},
    {"\U0001F512", "locked"},
    {"\U0001F513", "unlocked"},
    {"\U0001F511", "key"},
    {"\U0001F528", "hammer"},
    {"⚙", "gear"},
    {"\U0001F4CC", "pushpin"},
    {"\U0001F4CE", "paperclip"},
    {"✂", "scissors"},
    {"\U0001F4C8", "chart_increasing"},
    {"\U0001F4C9", "chart_decreasing"},
    {"\U0001F4CA", "bar_chart"},
    {"\U0001F4C5", "calendar"},
    {"\U0001F514", "bell"},
    {"\U0001F50D", "magnifying_glass_tilted_left"},
    {"\U0001F6A8", "police_car_light"},
    {"\U0001F4E2", "loudspeaker"},
    // symbols
    {"\U0001F6AB", "prohibited"},
    {"⚠", "warning"},
    {"❓", "question_mark"},
    {"❗", "exclamation_mark"},
    {"❌", "cross_mark"},
    {"⭕", "hollow_red_circle"},
    {"✅", "check_mark_button"},
    {"✔", "check_mark"},
    {"➕", "plus"},
    {"➖", "minus"},
    {"♻", "recycling_symbol"},
};

}  // namespace

const std::unordered_map<std::string_view, std::string_view>& emoji_table() {
  static const auto* table = [] {
    auto* m = new std::unordered_map<std::string_view, std::string_view>();
    m->reserve(std::size(kEmojiEntries));
    for (const auto& e : kEmojiEntries) {
      (*m)[e.bytes] = e.name;
    }
    return m;
  }();
  return *table;
}

}  // namespace pqlm
